//! Codecs: PGM images (ASCII P2 and binary P5), the kernel text format, and
//! metrics JSON.
//!
//! PGM reads accept any maxval in 1-255 and use the stored values as-is (no
//! rescaling); writes always emit maxval 255. The parser never reads past
//! the declared pixel count; trailing bytes are reported back to the
//! caller, not treated as an error.

use crate::error::{Error, Result};
use crate::mask::{Kernel, MaskKind};
use crate::pipeline::{EdgeMetrics, GrayImage};

/// PGM container flavor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PgmVariant {
    /// `P2`, ASCII decimals.
    Ascii,
    /// `P5`, raw bytes.
    Binary,
}

fn pgm_err(field: &'static str, offset: usize, reason: impl Into<String>) -> Error {
    Error::PgmParse {
        field,
        offset,
        reason: reason.into(),
    }
}

fn is_ws(b: u8) -> bool {
    matches!(b, b' ' | b'\t' | b'\r' | b'\n' | 0x0b | 0x0c)
}

/// Skip whitespace and '#' comment lines; returns the next token offset.
fn skip_header_ws(bytes: &[u8], mut pos: usize) -> usize {
    loop {
        while pos < bytes.len() && is_ws(bytes[pos]) {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
        } else {
            return pos;
        }
    }
}

fn read_header_number(bytes: &[u8], pos: usize, field: &'static str) -> Result<(u64, usize)> {
    let start = skip_header_ws(bytes, pos);
    if start >= bytes.len() {
        return Err(pgm_err(field, start, "unexpected end of input"));
    }
    let mut end = start;
    while end < bytes.len() && bytes[end].is_ascii_digit() {
        end += 1;
    }
    if end == start {
        return Err(pgm_err(
            field,
            start,
            format!("expected a decimal number, found byte 0x{:02x}", bytes[start]),
        ));
    }
    let text = std::str::from_utf8(&bytes[start..end]).expect("ascii digits");
    let value: u64 = text
        .parse()
        .map_err(|_| pgm_err(field, start, format!("number {text:?} out of range")))?;
    Ok((value, end))
}

/// Parse a PGM image, returning the image and the count of unread trailing
/// bytes (trailing whitespace after ASCII data does not count).
pub fn read_pgm_full(bytes: &[u8]) -> Result<(GrayImage, usize)> {
    if bytes.len() < 2 {
        return Err(pgm_err("magic", 0, "input shorter than a magic number"));
    }
    let variant = match &bytes[..2] {
        b"P2" => PgmVariant::Ascii,
        b"P5" => PgmVariant::Binary,
        other => {
            let shown = String::from_utf8_lossy(other);
            return Err(pgm_err(
                "magic",
                0,
                format!("unsupported format {shown:?} (expected P2 or P5)"),
            ));
        }
    };

    let (width, pos) = read_header_number(bytes, 2, "width")?;
    if width == 0 {
        return Err(pgm_err("width", pos, "width must be positive"));
    }
    let (height, pos) = read_header_number(bytes, pos, "height")?;
    if height == 0 {
        return Err(pgm_err("height", pos, "height must be positive"));
    }
    let (maxval, pos) = read_header_number(bytes, pos, "maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(pgm_err(
            "maxval",
            pos,
            format!("maxval must lie in 1-255, got {maxval}"),
        ));
    }
    let pixel_count = (width as usize)
        .checked_mul(height as usize)
        .ok_or_else(|| pgm_err("height", pos, "width * height overflows"))?;

    match variant {
        PgmVariant::Binary => {
            // exactly one whitespace byte separates the header from the raster
            if pos >= bytes.len() || !is_ws(bytes[pos]) {
                return Err(pgm_err(
                    "pixel data",
                    pos,
                    "expected a single whitespace byte after maxval",
                ));
            }
            let data_start = pos + 1;
            let data_end = data_start + pixel_count;
            if bytes.len() < data_end {
                return Err(pgm_err(
                    "pixel data",
                    bytes.len(),
                    format!(
                        "truncated raster: expected {pixel_count} bytes, found {}",
                        bytes.len().saturating_sub(data_start)
                    ),
                ));
            }
            let image = GrayImage::new(
                width as usize,
                height as usize,
                bytes[data_start..data_end].to_vec(),
            )?;
            Ok((image, bytes.len() - data_end))
        }
        PgmVariant::Ascii => {
            let mut intensities = Vec::with_capacity(pixel_count);
            let mut cursor = pos;
            for _ in 0..pixel_count {
                let start = skip_pixel_ws(bytes, cursor);
                if start >= bytes.len() {
                    return Err(pgm_err(
                        "pixel data",
                        start,
                        format!(
                            "truncated raster: expected {pixel_count} values, found {}",
                            intensities.len()
                        ),
                    ));
                }
                let mut end = start;
                while end < bytes.len() && bytes[end].is_ascii_digit() {
                    end += 1;
                }
                if end == start {
                    return Err(pgm_err(
                        "pixel data",
                        start,
                        format!("expected a decimal value, found byte 0x{:02x}", bytes[start]),
                    ));
                }
                let text = std::str::from_utf8(&bytes[start..end]).expect("ascii digits");
                let value: u64 = text
                    .parse()
                    .map_err(|_| pgm_err("pixel data", start, format!("value {text:?} out of range")))?;
                if value > 255 {
                    return Err(pgm_err(
                        "pixel data",
                        start,
                        format!("value {value} exceeds 255"),
                    ));
                }
                intensities.push(value as u8);
                cursor = end;
            }
            let image = GrayImage::new(width as usize, height as usize, intensities)?;
            // trailing whitespace is normal formatting; anything else counts
            let rest = skip_pixel_ws(bytes, cursor);
            Ok((image, bytes.len() - rest))
        }
    }
}

fn skip_pixel_ws(bytes: &[u8], mut pos: usize) -> usize {
    while pos < bytes.len() && is_ws(bytes[pos]) {
        pos += 1;
    }
    pos
}

/// Parse a PGM image, ignoring any trailing bytes.
pub fn read_pgm(bytes: &[u8]) -> Result<GrayImage> {
    read_pgm_full(bytes).map(|(image, _)| image)
}

/// Encode an image as PGM with maxval 255. P5 output is byte-deterministic:
/// `P5\n{width} {height}\n255\n` followed by the raster; P2 emits one image
/// row per line with single spaces.
pub fn write_pgm(image: &GrayImage, variant: PgmVariant) -> Vec<u8> {
    match variant {
        PgmVariant::Binary => {
            let mut out = format!("P5\n{} {}\n255\n", image.width(), image.height()).into_bytes();
            out.extend_from_slice(image.intensities());
            out
        }
        PgmVariant::Ascii => {
            let mut out = format!("P2\n{} {}\n255\n", image.width(), image.height());
            for row in image.intensities().chunks(image.width()) {
                let mut first = true;
                for v in row {
                    if !first {
                        out.push(' ');
                    }
                    out.push_str(&v.to_string());
                    first = false;
                }
                out.push('\n');
            }
            out.into_bytes()
        }
    }
}

const KIND_PREFIX: &str = "# kind:";
const NORMALIZED_PREFIX: &str = "# normalized:";

/// Default metadata comment lines for a kernel.
pub fn kernel_comments(kernel: &Kernel) -> Vec<String> {
    vec![
        format!("{KIND_PREFIX} {}", kernel.kind()),
        format!("{NORMALIZED_PREFIX} {}", kernel.is_normalized()),
    ]
}

/// Encode a kernel in the shared text format with the given comment lines
/// (emitted verbatim, in order, before the `size` line).
pub fn write_kernel_text_with_comments(kernel: &Kernel, comments: &[String]) -> String {
    let mut out = String::new();
    for line in comments {
        out.push_str(line);
        out.push('\n');
    }
    out.push_str(&format!("size {}\n", kernel.size()));
    for row in kernel.coefficients().chunks(kernel.size()) {
        let mut first = true;
        for v in row {
            if !first {
                out.push(' ');
            }
            // 9 significant digits
            out.push_str(&format!("{v:.8e}"));
            first = false;
        }
        out.push('\n');
    }
    out
}

/// Encode a kernel with its default metadata comments.
pub fn write_kernel_text(kernel: &Kernel) -> String {
    write_kernel_text_with_comments(kernel, &kernel_comments(kernel))
}

/// Parse the kernel text format, returning the kernel and the comment lines
/// verbatim. Metadata is recovered from `# kind:` and `# normalized:`
/// comments; files without them default to a raw smoothing kernel.
pub fn read_kernel_text(text: &str) -> Result<(Kernel, Vec<String>)> {
    let mut comments = Vec::new();
    let mut kind = MaskKind::Smoothing;
    let mut normalized = false;
    let mut size: Option<usize> = None;
    let mut coefficients = Vec::new();
    let mut rows_seen = 0usize;

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim_end();
        if line.starts_with('#') {
            if size.is_some() {
                return Err(Error::KernelParse {
                    line: line_no,
                    reason: "comments must precede the size line".into(),
                });
            }
            if let Some(rest) = line.strip_prefix(KIND_PREFIX) {
                kind = rest.trim().parse().map_err(|_| Error::KernelParse {
                    line: line_no,
                    reason: format!("unknown mask kind {:?}", rest.trim()),
                })?;
            } else if let Some(rest) = line.strip_prefix(NORMALIZED_PREFIX) {
                normalized = match rest.trim() {
                    "true" => true,
                    "false" => false,
                    other => {
                        return Err(Error::KernelParse {
                            line: line_no,
                            reason: format!("normalized flag must be true or false, got {other:?}"),
                        })
                    }
                };
            }
            comments.push(line.to_string());
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        match size {
            None => {
                let rest = line.trim().strip_prefix("size").ok_or_else(|| Error::KernelParse {
                    line: line_no,
                    reason: format!("expected a `size N` line, got {line:?}"),
                })?;
                let n: usize = rest.trim().parse().map_err(|_| Error::KernelParse {
                    line: line_no,
                    reason: format!("malformed size {:?}", rest.trim()),
                })?;
                if n == 0 {
                    return Err(Error::KernelParse {
                        line: line_no,
                        reason: "size must be at least 1".into(),
                    });
                }
                size = Some(n);
            }
            Some(n) => {
                if rows_seen == n {
                    return Err(Error::KernelParse {
                        line: line_no,
                        reason: format!("more than {n} coefficient rows"),
                    });
                }
                let row: Vec<f64> = line
                    .split_whitespace()
                    .map(|tok| {
                        tok.parse::<f64>().map_err(|_| Error::KernelParse {
                            line: line_no,
                            reason: format!("malformed coefficient {tok:?}"),
                        })
                    })
                    .collect::<Result<_>>()?;
                if row.len() != n {
                    return Err(Error::KernelParse {
                        line: line_no,
                        reason: format!("expected {n} coefficients in row, got {}", row.len()),
                    });
                }
                coefficients.extend(row);
                rows_seen += 1;
            }
        }
    }

    let n = size.ok_or_else(|| Error::KernelParse {
        line: text.lines().count() + 1,
        reason: "missing size line".into(),
    })?;
    if rows_seen != n {
        return Err(Error::KernelParse {
            line: text.lines().count() + 1,
            reason: format!("expected {n} coefficient rows, got {rows_seen}"),
        });
    }
    let kernel = Kernel::from_parts(n, coefficients, kind, normalized).map_err(|e| {
        Error::KernelParse {
            line: 1,
            reason: e.to_string(),
        }
    })?;
    Ok((kernel, comments))
}

/// Serialize a metrics record as a flat JSON object.
pub fn write_metrics_json(metrics: &EdgeMetrics) -> String {
    let mut s = serde_json::to_string_pretty(metrics).expect("metrics are plain floats");
    s.push('\n');
    s
}
