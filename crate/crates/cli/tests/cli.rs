//! End-to-end tests of the `wedge` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use wedge_core::io::{read_kernel_text, read_pgm, write_pgm, PgmVariant};
use wedge_core::{
    detect_edges, Detector, EdgeMap, EdgeOptions, GrayImage, MaskKind, SamplingGrid,
    WeibullParams,
};

/// The CLI's --center default, spelled exactly as the flag default is.
#[allow(clippy::approx_constant)]
const CLI_DEFAULT_CENTER: f64 = 0.70710678;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wedge"))
}

fn work_dir(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn step_image() -> GrayImage {
    let mut data = vec![0u8; 64 * 64];
    for r in 0..64 {
        for c in 32..64 {
            data[r * 64 + c] = 255;
        }
    }
    GrayImage::new(64, 64, data).unwrap()
}

fn write_image(path: &Path, image: &GrayImage) {
    std::fs::write(path, write_pgm(image, PgmVariant::Binary)).unwrap();
}

#[test]
fn gen_mask_prints_the_published_normalized_pair() {
    let out = bin()
        .args(["gen-mask", "--alpha", "1", "--beta", "2", "--kind", "grad"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    for value in ["0.2184", "0.4721", "0.3095", "-0.2184", "-0.4721", "-0.3095"] {
        assert!(text.contains(value), "missing {value} in:\n{text}");
    }
    assert!(text.contains("Mx") && text.contains("My"));
}

#[test]
fn gen_mask_raw_beta3_prints_sign_corrected_rows() {
    let out = bin()
        .args(["gen-mask", "--beta", "3", "--kind", "grad", "--raw"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("-2.1526"), "row 3 must be negative:\n{text}");
    assert!(text.contains("-0.2607") || text.contains("-0.2606"));
}

#[test]
fn gen_mask_rejects_even_sizes() {
    let out = bin().args(["gen-mask", "--size", "4"]).output().unwrap();
    assert!(!out.status.success());
    assert!(stderr(&out).contains("size must be odd"));
}

#[test]
fn gen_mask_writes_readable_kernel_files() {
    let dir = work_dir("gen_mask_files");
    let out_path = dir.join("mask.kernel");
    let out = bin()
        .args(["gen-mask", "--kind", "grad", "--out"])
        .arg(&out_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));

    for (suffix, kind) in [("mx", MaskKind::GradientX), ("my", MaskKind::GradientY)] {
        let path = dir.join(format!("mask_{suffix}.kernel"));
        let text = std::fs::read_to_string(&path).unwrap();
        let (kernel, comments) = read_kernel_text(&text).unwrap();
        assert_eq!(kernel.kind(), kind);
        assert!(kernel.is_normalized());
        assert_eq!(kernel.size(), 3);
        assert!(comments.iter().any(|c| c.contains("alpha=1")));
    }
}

#[test]
fn gen_mask_smooth_writes_single_file() {
    let dir = work_dir("gen_mask_smooth");
    let out_path = dir.join("smooth.kernel");
    let out = bin()
        .args(["gen-mask", "--kind", "smooth", "--out"])
        .arg(&out_path)
        .output()
        .unwrap();
    assert!(out.status.success());
    let (kernel, _) = read_kernel_text(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(kernel.kind(), MaskKind::Smoothing);
    assert!((kernel.sum() - 1.0).abs() < 1e-9);
}

#[test]
fn gen_mask_warns_on_wide_grids() {
    let out = bin().args(["gen-mask", "--size", "5"]).output().unwrap();
    assert!(out.status.success());
    assert!(stderr(&out).contains("warning"));
}

#[test]
fn edges_constant_image_has_zero_density() {
    let dir = work_dir("edges_constant");
    let input = dir.join("flat.pgm");
    write_image(&input, &GrayImage::constant(32, 32, 170).unwrap());
    let out_path = dir.join("edges.pgm");
    let out = bin()
        .arg("edges")
        .arg(&input)
        .arg("--out")
        .arg(&out_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["edge_density"], 0.0);
    let map = EdgeMap::from_gray(&read_pgm(&std::fs::read(&out_path).unwrap()).unwrap());
    assert_eq!(map.edge_count(), 0);
}

#[test]
fn edges_step_image_localizes_the_boundary() {
    let dir = work_dir("edges_step");
    let input = dir.join("step.pgm");
    write_image(&input, &step_image());
    let out_path = dir.join("edges.pgm");
    let mag_path = dir.join("mag.pgm");
    let out = bin()
        .arg("edges")
        .arg(&input)
        .arg("--out")
        .arg(&out_path)
        .arg("--save-magnitude")
        .arg(&mag_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let map = EdgeMap::from_gray(&read_pgm(&std::fs::read(&out_path).unwrap()).unwrap());
    assert!(map.edge_count() > 0);
    for r in 0..64 {
        for c in 0..64 {
            if map.get(r, c) {
                assert!((c as f64 - 31.5).abs() <= 1.0, "edge at column {c}");
            }
        }
    }
    // rescaled magnitude plane exists and peaks at 255
    let mag = read_pgm(&std::fs::read(&mag_path).unwrap()).unwrap();
    assert_eq!(mag.intensities().iter().max(), Some(&255));
}

#[test]
fn edges_missing_input_leaves_no_output() {
    let dir = work_dir("edges_missing");
    let out_path = dir.join("edges.pgm");
    let out = bin()
        .arg("edges")
        .arg(dir.join("nonexistent.pgm"))
        .arg("--out")
        .arg(&out_path)
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(!out_path.exists(), "failed run must not leave outputs");
}

#[test]
fn edges_invalid_threshold_is_rejected_before_io() {
    let dir = work_dir("edges_bad_threshold");
    let out_path = dir.join("edges.pgm");
    // input intentionally absent: flag validation must fail first
    let out = bin()
        .arg("edges")
        .arg(dir.join("absent.pgm"))
        .arg("--out")
        .arg(&out_path)
        .args(["--threshold", "q90"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(stderr(&out).contains("threshold"));
    assert!(!out_path.exists());
}

#[test]
fn edges_sobel_matches_library_composition() {
    let dir = work_dir("edges_sobel_lib");
    let mut data = vec![0u8; 48 * 40];
    for (i, v) in data.iter_mut().enumerate() {
        *v = ((i * 131 + 17) % 256) as u8;
    }
    let image = GrayImage::new(48, 40, data).unwrap();
    let input = dir.join("in.pgm");
    write_image(&input, &image);
    let out_path = dir.join("edges.pgm");
    let out = bin()
        .arg("edges")
        .arg(&input)
        .args(["--detector", "sobel", "--out"])
        .arg(&out_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));

    let (expected, _) = detect_edges(&image, &Detector::Sobel, &EdgeOptions::default()).unwrap();
    let cli_bytes = std::fs::read(&out_path).unwrap();
    assert_eq!(cli_bytes, write_pgm(&expected.to_gray(), PgmVariant::Binary));
}

#[test]
fn edges_supports_every_detector_flag() {
    let dir = work_dir("edges_detectors");
    let input = dir.join("step.pgm");
    write_image(&input, &step_image());
    for (detector, extra) in [
        ("weibull", vec![]),
        ("sobel", vec![]),
        ("prewitt", vec![]),
        ("roberts", vec![]),
        ("gaussian", vec!["--sigma", "2"]),
    ] {
        let out_path = dir.join(format!("edges_{detector}.pgm"));
        let out = bin()
            .arg("edges")
            .arg(&input)
            .args(["--detector", detector, "--out"])
            .arg(&out_path)
            .args(&extra)
            .output()
            .unwrap();
        assert!(out.status.success(), "{detector}: {}", stderr(&out));
        let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
        assert_eq!(report["detector"], detector);
        assert!(report["edge_density"].as_f64().unwrap() > 0.0, "{detector}");
        assert!(out_path.exists());
    }
}

#[test]
fn smooth_constant_image_is_unchanged() {
    let dir = work_dir("smooth_constant");
    let input = dir.join("flat.pgm");
    let image = GrayImage::constant(16, 16, 200).unwrap();
    write_image(&input, &image);
    let out_path = dir.join("smoothed.pgm");
    let out = bin()
        .arg("smooth")
        .arg(&input)
        .arg("--out")
        .arg(&out_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let smoothed = read_pgm(&std::fs::read(&out_path).unwrap()).unwrap();
    assert_eq!(smoothed.intensities(), image.intensities());
}

#[test]
fn smooth_accepts_kernel_files() {
    let dir = work_dir("smooth_kernel_file");
    let kernel_path = dir.join("smooth.kernel");
    assert!(bin()
        .args(["gen-mask", "--kind", "smooth", "--beta", "3", "--out"])
        .arg(&kernel_path)
        .output()
        .unwrap()
        .status
        .success());

    let input = dir.join("in.pgm");
    write_image(&input, &step_image());
    let out_path = dir.join("out.pgm");
    let out = bin()
        .arg("smooth")
        .arg(&input)
        .arg("--kernel")
        .arg(&kernel_path)
        .arg("--out")
        .arg(&out_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(out_path.exists());
}

#[test]
fn compare_reports_counting_metrics() {
    let dir = work_dir("compare");
    let a = dir.join("a.pgm");
    let b = dir.join("b.pgm");
    let map_a = EdgeMap::new(2, 2, vec![true, false, false, false]).unwrap();
    let map_b = EdgeMap::new(2, 2, vec![false, true, false, false]).unwrap();
    write_image(&a, &map_a.to_gray());
    write_image(&b, &map_b.to_gray());

    // identical maps
    let out = bin().arg("compare").arg(&a).arg(&a).output().unwrap();
    assert!(out.status.success());
    let metrics: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(metrics["f1"], 1.0);

    // disjoint maps
    let out = bin().arg("compare").arg(&a).arg(&b).output().unwrap();
    let metrics: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(metrics["f1"], 0.0);

    // dimension mismatch
    let c = dir.join("c.pgm");
    write_image(&c, &GrayImage::constant(3, 3, 0).unwrap());
    let out = bin().arg("compare").arg(&a).arg(&c).output().unwrap();
    assert!(!out.status.success());
    assert!(stderr(&out).contains("dimension"));
}

#[test]
fn sweep_writes_one_map_per_cell_and_a_summary() {
    let dir = work_dir("sweep");
    let input = dir.join("step.pgm");
    write_image(&input, &step_image());
    let out_dir = dir.join("cells");
    let out = bin()
        .arg("sweep")
        .arg(&input)
        .args(["--alphas", "1", "--betas", "2,3", "--out-dir"])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(out_dir.join("edges_a1_b2.pgm").exists());
    assert!(out_dir.join("edges_a1_b3.pgm").exists());

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap())
            .unwrap();
    let cells = summary["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 2);
    assert!(cells.iter().all(|c| c["status"] == "ok"));
}

#[test]
fn sweep_cell_count_is_the_cartesian_product() {
    let dir = work_dir("sweep_product");
    let input = dir.join("step.pgm");
    write_image(&input, &step_image());
    let out_dir = dir.join("cells");
    let out = bin()
        .arg("sweep")
        .arg(&input)
        .args(["--alphas", "0.5,1", "--betas", "1.5,2,3", "--out-dir"])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["cells"].as_array().unwrap().len(), 6);
}

#[test]
fn sweep_records_degenerate_cells_without_failing() {
    let dir = work_dir("sweep_degenerate");
    let input = dir.join("step.pgm");
    write_image(&input, &step_image());
    let out_dir = dir.join("cells");
    // alpha=0.3, beta=4 puts the bracket root past the widest grid
    // coordinate, so the whole mask is positive and normalization degenerates
    let out = bin()
        .arg("sweep")
        .arg(&input)
        .args(["--alphas", "0.3,1", "--betas", "4", "--out-dir"])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "degenerate cells are not fatal: {}", stderr(&out));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap())
            .unwrap();
    let cells = summary["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 2);
    assert_eq!(cells[0]["status"], "error");
    assert!(cells[0]["error"].as_str().unwrap().contains("degenerate"));
    assert_eq!(cells[1]["status"], "ok");
    assert!(!out_dir.join("edges_a0.3_b4.pgm").exists());
    assert!(out_dir.join("edges_a1_b4.pgm").exists());
}

#[test]
fn sweep_requires_beta_values() {
    let dir = work_dir("sweep_missing_betas");
    let input = dir.join("step.pgm");
    write_image(&input, &step_image());
    let out = bin()
        .arg("sweep")
        .arg(&input)
        .args(["--alphas", "1", "--out-dir"])
        .arg(dir.join("cells"))
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn edges_pre_smooth_matches_manual_pipeline() {
    let dir = work_dir("edges_pre_smooth");
    let kernel_path = dir.join("smooth.kernel");
    assert!(bin()
        .args(["gen-mask", "--kind", "smooth", "--out"])
        .arg(&kernel_path)
        .output()
        .unwrap()
        .status
        .success());

    let image = step_image();
    let input = dir.join("in.pgm");
    write_image(&input, &image);
    let out_path = dir.join("edges.pgm");
    let out = bin()
        .arg("edges")
        .arg(&input)
        .arg("--pre-smooth")
        .arg(&kernel_path)
        .arg("--out")
        .arg(&out_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));

    let params = WeibullParams::new(1.0, 2.0).unwrap();
    let grid = SamplingGrid::new(1, 0.5, (CLI_DEFAULT_CENTER, CLI_DEFAULT_CENTER)).unwrap();
    let (file_kernel, _) =
        read_kernel_text(&std::fs::read_to_string(&kernel_path).unwrap()).unwrap();
    let options = EdgeOptions {
        pre_smooth: Some(file_kernel),
        ..EdgeOptions::default()
    };
    let detector = Detector::Weibull { params, grid };
    let (expected, _) = detect_edges(&image, &detector, &options).unwrap();
    let cli_bytes = std::fs::read(&out_path).unwrap();
    assert_eq!(cli_bytes, write_pgm(&expected.to_gray(), PgmVariant::Binary));
}
