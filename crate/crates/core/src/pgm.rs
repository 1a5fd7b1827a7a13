//! Netpbm graymap (PGM) reading and writing, ASCII `P2` and binary `P5`.

use thiserror::Error;

use crate::image::GrayImage;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PgmError {
    #[error("malformed PGM header: {0}")]
    MalformedHeader(String),
    #[error("PGM payload truncated: expected {expected} samples, found {found}")]
    TruncatedPayload { expected: usize, found: usize },
    #[error("unsupported PGM maxval {0} (at most 255)")]
    UnsupportedMaxval(u32),
    #[error("PGM sample {sample} exceeds maxval {maxval}")]
    SampleOutOfRange { sample: u32, maxval: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PgmFormat {
    /// `P2`, decimal samples.
    Ascii,
    /// `P5`, one byte per sample.
    #[default]
    Binary,
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.data.get(self.pos) {
            if b == b'#' {
                while self
                    .data
                    .get(self.pos)
                    .is_some_and(|&c| c != b'\n' && c != b'\r')
                {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32, PgmError> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.data.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(PgmError::MalformedHeader(format!("missing {what}")));
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| PgmError::MalformedHeader(format!("{what} out of range")))
    }
}

/// Decodes a `P2` or `P5` graymap with `maxval <= 255`. Samples are kept in
/// native units; a smaller maxval is not rescaled.
pub fn read_pgm(bytes: &[u8]) -> Result<GrayImage, PgmError> {
    let format = match bytes.get(..2) {
        Some(b"P2") => PgmFormat::Ascii,
        Some(b"P5") => PgmFormat::Binary,
        _ => return Err(PgmError::MalformedHeader("expected magic P2 or P5".into())),
    };
    let mut cur = Cursor {
        data: bytes,
        pos: 2,
    };
    if !cur
        .data
        .get(2)
        .is_some_and(|b| b.is_ascii_whitespace() || *b == b'#')
    {
        return Err(PgmError::MalformedHeader("no separator after magic".into()));
    }
    let width = cur.number("width")? as usize;
    let height = cur.number("height")? as usize;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(PgmError::MalformedHeader("zero dimension".into()));
    }
    if maxval == 0 || maxval > 255 {
        return Err(PgmError::UnsupportedMaxval(maxval));
    }
    let expected = width
        .checked_mul(height)
        .ok_or_else(|| PgmError::MalformedHeader("dimensions overflow".into()))?;

    let pixels = match format {
        PgmFormat::Binary => {
            // Exactly one whitespace byte separates maxval from the raster.
            if !cur.data.get(cur.pos).is_some_and(u8::is_ascii_whitespace) {
                return Err(PgmError::TruncatedPayload { expected, found: 0 });
            }
            let raster = &cur.data[cur.pos + 1..];
            if raster.len() < expected {
                return Err(PgmError::TruncatedPayload {
                    expected,
                    found: raster.len(),
                });
            }
            let raster = &raster[..expected];
            if let Some(&bad) = raster.iter().find(|&&s| u32::from(s) > maxval) {
                return Err(PgmError::SampleOutOfRange {
                    sample: bad.into(),
                    maxval,
                });
            }
            raster.to_vec()
        }
        PgmFormat::Ascii => {
            let mut out = Vec::with_capacity(expected);
            for found in 0..expected {
                cur.skip_space_and_comments();
                if cur.pos >= cur.data.len() {
                    return Err(PgmError::TruncatedPayload { expected, found });
                }
                let sample = cur.number("sample")?;
                if sample > maxval {
                    return Err(PgmError::SampleOutOfRange { sample, maxval });
                }
                out.push(sample as u8);
            }
            out
        }
    };
    Ok(GrayImage::new(width, height, pixels).expect("dimensions checked"))
}

/// Encodes with `maxval` 255.
pub fn write_pgm(img: &GrayImage, format: PgmFormat) -> Vec<u8> {
    let (w, h) = (img.width(), img.height());
    match format {
        PgmFormat::Binary => {
            let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
            out.extend_from_slice(img.pixels());
            out
        }
        PgmFormat::Ascii => {
            let mut out = format!("P2\n{w} {h}\n255\n");
            for row in img.pixels().chunks(w) {
                let line: Vec<String> = row.iter().map(u8::to_string).collect();
                out.push_str(&line.join(" "));
                out.push('\n');
            }
            out.into_bytes()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> GrayImage {
        GrayImage::new(2, 2, vec![0, 128, 128, 255]).unwrap()
    }

    #[test]
    fn reads_minimal_binary() {
        let mut bytes = b"P5 2 2 255\n".to_vec();
        bytes.extend([0, 128, 128, 255]);
        assert_eq!(read_pgm(&bytes).unwrap(), sample());
    }

    #[test]
    fn ascii_matches_binary() {
        let text = b"P2\n# made by hand\n2 2\n# comment before maxval\n255\n0 128\n128 255\n";
        assert_eq!(read_pgm(text).unwrap(), sample());
    }

    #[test]
    fn truncated_payload() {
        let mut bytes = b"P5 2 2 255\n".to_vec();
        bytes.extend([0, 128, 128]);
        assert_eq!(
            read_pgm(&bytes),
            Err(PgmError::TruncatedPayload {
                expected: 4,
                found: 3
            })
        );
        assert!(matches!(
            read_pgm(b"P2 2 2 255 1 2 3"),
            Err(PgmError::TruncatedPayload {
                expected: 4,
                found: 3
            })
        ));
    }

    #[test]
    fn header_errors() {
        assert!(matches!(
            read_pgm(b"P6 1 1 255\n\0"),
            Err(PgmError::MalformedHeader(_))
        ));
        assert!(matches!(
            read_pgm(b"P5 x 1 255\n\0"),
            Err(PgmError::MalformedHeader(_))
        ));
        assert!(matches!(
            read_pgm(b"P5 0 1 255\n"),
            Err(PgmError::MalformedHeader(_))
        ));
        assert_eq!(
            read_pgm(b"P5 1 1 65535\n\0\0"),
            Err(PgmError::UnsupportedMaxval(65535))
        );
        assert_eq!(
            read_pgm(b"P2 1 1 15 16"),
            Err(PgmError::SampleOutOfRange {
                sample: 16,
                maxval: 15
            })
        );
    }

    #[test]
    fn small_maxval_is_not_rescaled() {
        let img = read_pgm(b"P2 3 1 15 0 7 15").unwrap();
        assert_eq!(img.pixels(), &[0, 7, 15]);
    }

    #[test]
    fn minimal_file() {
        let img = GrayImage::new(1, 1, vec![0]).unwrap();
        assert_eq!(write_pgm(&img, PgmFormat::Binary), b"P5\n1 1\n255\n\0");
        assert_eq!(write_pgm(&img, PgmFormat::Ascii), b"P2\n1 1\n255\n0\n");
    }

    #[test]
    fn binary_raster_may_start_with_whitespace_byte() {
        let img = GrayImage::new(3, 1, vec![b'\n', b' ', b'#']).unwrap();
        let bytes = write_pgm(&img, PgmFormat::Binary);
        assert_eq!(read_pgm(&bytes).unwrap(), img);
    }
}
