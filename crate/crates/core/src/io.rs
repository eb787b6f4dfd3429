//! Image file I/O: 8-bit PGM (P2 and P5) read and write, PNG read.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, ImageIoError, Result};
use crate::image::GrayImage;

const PNG_SIGNATURE: [u8; 8] = [0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a];

/// Loads a grayscale image; PGM is detected by its `P2`/`P5` magic and PNG
/// by its signature. Color PNGs are reduced to luminance.
pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            ImageIoError::Missing {
                path: path.to_path_buf(),
            }
        } else {
            ImageIoError::Io {
                path: path.to_path_buf(),
                source: e,
            }
        }
    })?;
    if bytes.starts_with(b"P2") || bytes.starts_with(b"P5") {
        return Ok(decode_pgm(&bytes, path)?);
    }
    if bytes.starts_with(&PNG_SIGNATURE) {
        return decode_png(&bytes, path);
    }
    Err(ImageIoError::UnsupportedFormat {
        path: path.to_path_buf(),
    }
    .into())
}

struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl HeaderReader<'_> {
    fn malformed(&self, reason: impl Into<String>) -> ImageIoError {
        ImageIoError::MalformedHeader {
            path: self.path.to_path_buf(),
            offset: self.pos,
            reason: reason.into(),
        }
    }

    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> std::result::Result<u32, ImageIoError> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            self.pos = start;
            return Err(self.malformed(format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| {
                self.pos = start;
                self.malformed(format!("{what} out of range"))
            })
    }
}

/// Decodes an 8-bit P2 or P5 graymap; `path` is only used for error context.
pub fn decode_pgm(bytes: &[u8], path: &Path) -> std::result::Result<GrayImage, ImageIoError> {
    let mut rd = HeaderReader { bytes, pos: 0, path };
    let binary = match bytes.get(..2) {
        Some(b"P5") => true,
        Some(b"P2") => false,
        _ => return Err(rd.malformed("missing P2/P5 magic")),
    };
    rd.pos = 2;
    let width = rd.number("width")? as usize;
    let height = rd.number("height")? as usize;
    if width == 0 || height == 0 {
        return Err(rd.malformed("zero image dimension"));
    }
    let maxval = rd.number("maxval")?;
    if maxval != 255 {
        return Err(ImageIoError::UnsupportedDepth {
            path: path.to_path_buf(),
            maxval,
        });
    }
    let n = width * height;

    let data: Vec<f64> = if binary {
        match bytes.get(rd.pos) {
            Some(c) if c.is_ascii_whitespace() => rd.pos += 1,
            _ => return Err(rd.malformed("expected a single whitespace before pixel data")),
        }
        let body = &bytes[rd.pos..];
        if body.len() < n {
            return Err(ImageIoError::Truncated {
                path: path.to_path_buf(),
                offset: bytes.len(),
            });
        }
        body[..n].iter().map(|&b| b as f64).collect()
    } else {
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            rd.skip_space_and_comments();
            if rd.pos >= bytes.len() {
                return Err(ImageIoError::Truncated {
                    path: path.to_path_buf(),
                    offset: rd.pos,
                });
            }
            let at = rd.pos;
            let v = rd.number("pixel value").map_err(|_| ImageIoError::BadPixel {
                path: path.to_path_buf(),
                offset: at,
                reason: "not a decimal number".into(),
            })?;
            if v > maxval {
                return Err(ImageIoError::BadPixel {
                    path: path.to_path_buf(),
                    offset: at,
                    reason: format!("{v} exceeds maxval {maxval}"),
                });
            }
            out.push(v as f64);
        }
        out
    };
    Ok(GrayImage::new(width, height, data).expect("dimensions checked above"))
}

#[cfg(feature = "png")]
fn decode_png(bytes: &[u8], path: &Path) -> Result<GrayImage> {
    let decode_err = |reason: String| ImageIoError::Decode {
        path: path.to_path_buf(),
        reason,
    };
    let mut decoder = png::Decoder::new(bytes);
    decoder.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
    let mut reader = decoder.read_info().map_err(|e| decode_err(e.to_string()))?;
    let mut buf = vec![0; reader.output_buffer_size()];
    let info = reader.next_frame(&mut buf).map_err(|e| decode_err(e.to_string()))?;
    let channels = match info.color_type {
        png::ColorType::Grayscale => 1,
        png::ColorType::GrayscaleAlpha => 2,
        png::ColorType::Rgb => 3,
        png::ColorType::Rgba => 4,
        png::ColorType::Indexed => return Err(decode_err("unexpanded palette image".into()).into()),
    };
    let (w, h) = (info.width as usize, info.height as usize);
    let mut data = Vec::with_capacity(w * h);
    for row in buf[..info.buffer_size()].chunks_exact(info.line_size) {
        for px in row[..w * channels].chunks_exact(channels) {
            let v = if channels >= 3 {
                0.299 * px[0] as f64 + 0.587 * px[1] as f64 + 0.114 * px[2] as f64
            } else {
                px[0] as f64
            };
            data.push(v);
        }
    }
    GrayImage::new(w, h, data)
}

#[cfg(not(feature = "png"))]
fn decode_png(_bytes: &[u8], path: &Path) -> Result<GrayImage> {
    Err(ImageIoError::UnsupportedFormat {
        path: path.to_path_buf(),
    }
    .into())
}

/// Quantizes to 8 bits: round half away from zero, then clamp to `[0, 255]`.
/// NaN becomes 0.
pub fn quantize(v: f64) -> u8 {
    if v.is_nan() {
        0
    } else {
        v.round().clamp(0.0, 255.0) as u8
    }
}

pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(img.pixels().iter().map(|&v| quantize(v)));
    out
}

/// Writes a binary (P5) PGM.
pub fn save_image(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut f = fs::File::create(path).map_err(io_err)?;
    f.write_all(&encode_pgm(img)).map_err(io_err)?;
    Ok(())
}
