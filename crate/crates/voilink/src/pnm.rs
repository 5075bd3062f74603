//! Binary PGM (P5) and PPM (P6) image files, 8 bits per sample.
//!
//! The header is text — magic, width, height, maximum value, each
//! separated by whitespace, with `#` comments allowed between tokens —
//! followed by a single whitespace byte and the raw interleaved payload.
//! Parsing distinguishes three failure classes so callers can report them
//! precisely: a malformed header, a payload shorter than the header
//! promises, and a sample depth other than 8 bits.

use std::path::Path;

use crate::error::{Error, Result};
use crate::image::Image;

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a str,
}

impl<'a> Cursor<'a> {
    fn malformed(&self, detail: impl Into<String>) -> Error {
        Error::MalformedHeader {
            path: self.path.to_string(),
            detail: detail.into(),
        }
    }

    /// Skip whitespace and `#` comments (which run to end of line).
    fn skip_separators(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b' ' | b'\t' | b'\r' | b'\n' | 0x0b | 0x0c => self.pos += 1,
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                _ => return,
            }
        }
    }

    fn read_number(&mut self, what: &str) -> Result<u32> {
        self.skip_separators();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.malformed(format!("expected a numeric {what}")));
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        text.parse::<u32>()
            .map_err(|_| self.malformed(format!("{what} `{text}` out of range")))
    }
}

/// Load a binary PGM or PPM file.
pub fn load_image(path: &Path) -> Result<Image> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let path_str = path.display().to_string();
    let mut cursor = Cursor {
        bytes: &bytes,
        pos: 0,
        path: &path_str,
    };

    let channels = match bytes.get(0..2) {
        Some(b"P5") => 1usize,
        Some(b"P6") => 3usize,
        Some(other) => {
            return Err(cursor.malformed(format!(
                "magic `{}` is not binary PGM (P5) or PPM (P6)",
                String::from_utf8_lossy(other)
            )))
        }
        None => return Err(cursor.malformed("file shorter than a magic number")),
    };
    cursor.pos = 2;

    let width = cursor.read_number("width")? as usize;
    let height = cursor.read_number("height")? as usize;
    let max_val = cursor.read_number("maximum value")?;
    if width == 0 || height == 0 {
        return Err(cursor.malformed(format!("degenerate dimensions {width}x{height}")));
    }
    if max_val == 0 || max_val > 65535 {
        return Err(cursor.malformed(format!("maximum value {max_val} out of range")));
    }
    if max_val > 255 {
        return Err(Error::UnsupportedDepth {
            path: path_str,
            maxval: max_val,
        });
    }
    // Exactly one whitespace byte separates the header from the payload.
    match bytes.get(cursor.pos) {
        Some(b' ' | b'\t' | b'\r' | b'\n') => cursor.pos += 1,
        _ => return Err(cursor.malformed("missing single whitespace before payload")),
    }

    let expected = width * height * channels;
    let payload = &bytes[cursor.pos..];
    if payload.len() < expected {
        return Err(Error::TruncatedPayload {
            path: path_str,
            expected,
            found: payload.len(),
        });
    }
    if payload.len() > expected {
        return Err(cursor.malformed(format!(
            "{} trailing bytes after the pixel payload",
            payload.len() - expected
        )));
    }
    let data: Vec<f64> = payload.iter().map(|&b| b as f64).collect();
    Image::new(height, width, channels, max_val as f64, data)
}

fn quantize(image: &Image) -> Vec<u8> {
    image
        .samples()
        .iter()
        .map(|&v| v.round().clamp(0.0, image.max_val()) as u8)
        .collect()
}

fn save(path: &Path, image: &Image, magic: &str) -> Result<()> {
    if image.max_val() > 255.0 {
        return Err(Error::UnsupportedDepth {
            path: path.display().to_string(),
            maxval: image.max_val() as u32,
        });
    }
    let mut bytes = format!(
        "{magic}\n{} {}\n{}\n",
        image.width(),
        image.height(),
        image.max_val() as u32
    )
    .into_bytes();
    bytes.extend_from_slice(&quantize(image));
    std::fs::write(path, bytes).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Write a single-channel image as binary PGM.
pub fn save_pgm(path: &Path, image: &Image) -> Result<()> {
    if image.channels() != 1 {
        return Err(Error::ShapeMismatch {
            expected: "1 channel for PGM".to_string(),
            actual: format!("{} channels", image.channels()),
        });
    }
    save(path, image, "P5")
}

/// Write a three-channel image as binary PPM.
pub fn save_ppm(path: &Path, image: &Image) -> Result<()> {
    if image.channels() != 3 {
        return Err(Error::ShapeMismatch {
            expected: "3 channels for PPM".to_string(),
            actual: format!("{} channels", image.channels()),
        });
    }
    save(path, image, "P6")
}

/// Write an image in whichever of the two formats matches its channel
/// count.
pub fn save_image(path: &Path, image: &Image) -> Result<()> {
    match image.channels() {
        1 => save_pgm(path, image),
        3 => save_ppm(path, image),
        c => Err(Error::ShapeMismatch {
            expected: "1 or 3 channels".to_string(),
            actual: format!("{c} channels"),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::synthetic_image;

    fn write_temp(bytes: &[u8]) -> (tempfile::TempDir, std::path::PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.pnm");
        std::fs::write(&path, bytes).unwrap();
        (dir, path)
    }

    #[test]
    fn single_gray_pixel() {
        let (_dir, path) = write_temp(b"P5 1 1 255\n\x80");
        let img = load_image(&path).unwrap();
        assert_eq!((img.height(), img.width(), img.channels()), (1, 1, 1));
        assert_eq!(img.max_val(), 255.0);
        assert_eq!(img.samples(), &[128.0]);
    }

    #[test]
    fn comments_anywhere_between_tokens() {
        let (_dir, path) =
            write_temp(b"P5 # magic\n# a comment line\n 2 # width\n1 # height\n255\n\x01\x02");
        let img = load_image(&path).unwrap();
        assert_eq!(img.samples(), &[1.0, 2.0]);
    }

    #[test]
    fn color_image_is_interleaved() {
        // One pixel: r=10 g=20 b=30.
        let (_dir, path) = write_temp(b"P6 1 1 255\n\x0a\x14\x1e");
        let img = load_image(&path).unwrap();
        assert_eq!(img.channels(), 3);
        assert_eq!(img.get(0, 0, 0), 10.0);
        assert_eq!(img.get(0, 0, 1), 20.0);
        assert_eq!(img.get(0, 0, 2), 30.0);
    }

    #[test]
    fn error_classes_are_distinct() {
        let (_dir, path) = write_temp(b"P4 1 1 255\n\x00");
        assert!(matches!(
            load_image(&path).unwrap_err(),
            Error::MalformedHeader { .. }
        ));

        let (_dir, path) = write_temp(b"P5 2 2 255\n\x00\x01");
        match load_image(&path).unwrap_err() {
            Error::TruncatedPayload { expected, found, .. } => {
                assert_eq!((expected, found), (4, 2));
            }
            other => panic!("expected truncation, got {other:?}"),
        }

        let (_dir, path) = write_temp(b"P5 1 1 65535\n\x00\x00");
        assert!(matches!(
            load_image(&path).unwrap_err(),
            Error::UnsupportedDepth { maxval: 65535, .. }
        ));

        let (_dir, path) = write_temp(b"P5 1 1\n");
        assert!(matches!(
            load_image(&path).unwrap_err(),
            Error::MalformedHeader { .. }
        ));

        // Trailing garbage after the payload.
        let (_dir, path) = write_temp(b"P5 1 1 255\n\x00\x00");
        assert!(matches!(
            load_image(&path).unwrap_err(),
            Error::MalformedHeader { .. }
        ));
    }

    #[test]
    fn gray_roundtrip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.pgm");
        let img = synthetic_image(7, 9, 11, 1).unwrap();
        // Quantize to integers so the 8-bit file is lossless.
        let quantized: Vec<f64> = img.samples().iter().map(|v| v.round()).collect();
        let img = Image::new(9, 11, 1, 255.0, quantized).unwrap();
        save_pgm(&path, &img).unwrap();
        let back = load_image(&path).unwrap();
        assert_eq!(back.samples(), img.samples());
        assert_eq!(back.shape_label(), img.shape_label());
    }

    #[test]
    fn color_roundtrip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.ppm");
        let img = synthetic_image(8, 6, 5, 3).unwrap();
        let quantized: Vec<f64> = img.samples().iter().map(|v| v.round()).collect();
        let img = Image::new(6, 5, 3, 255.0, quantized).unwrap();
        save_ppm(&path, &img).unwrap();
        let back = load_image(&path).unwrap();
        assert_eq!(back.samples(), img.samples());
    }

    #[test]
    fn save_checks_channel_counts() {
        let dir = tempfile::tempdir().unwrap();
        let gray = Image::constant(2, 2, 1, 7.0).unwrap();
        let color = Image::constant(2, 2, 3, 7.0).unwrap();
        assert!(save_ppm(&dir.path().join("x.ppm"), &gray).is_err());
        assert!(save_pgm(&dir.path().join("x.pgm"), &color).is_err());
        assert!(save_image(&dir.path().join("g.pgm"), &gray).is_ok());
        assert!(save_image(&dir.path().join("c.ppm"), &color).is_ok());
    }
}
