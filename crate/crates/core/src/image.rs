//! RGB raster images and binary PPM (P6) encoding.
//!
//! PPM is the interchange format for every image entering or leaving the
//! pipeline. The writer emits the canonical form `P6\n<w> <h>\n255\n` followed
//! by raw RGB bytes; the reader additionally tolerates comments and arbitrary
//! whitespace in the header, so third-party P6 files load as long as maxval
//! is 255.

use crate::error::{Error, Result};

/// One 8-bit RGB pixel.
pub type Rgb = [u8; 3];

/// A row-major RGB raster. Always at least 1x1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    width: u32,
    height: u32,
    pixels: Vec<Rgb>,
}

impl Image {
    /// A solid-color image.
    pub fn new(width: u32, height: u32, fill: Rgb) -> Result<Self> {
        check_dims(width, height)?;
        let pixels = vec![fill; width as usize * height as usize];
        Ok(Image {
            width,
            height,
            pixels,
        })
    }

    /// Wraps an existing pixel buffer; the length must be exactly `width * height`.
    pub fn from_pixels(width: u32, height: u32, pixels: Vec<Rgb>) -> Result<Self> {
        check_dims(width, height)?;
        let expected = width as usize * height as usize;
        if pixels.len() != expected {
            return Err(Error::LengthMismatch {
                left: pixels.len(),
                right: expected,
            });
        }
        Ok(Image {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixel(&self, x: u32, y: u32) -> Rgb {
        self.pixels[self.index(x, y)]
    }

    pub fn set_pixel(&mut self, x: u32, y: u32, value: Rgb) {
        let i = self.index(x, y);
        self.pixels[i] = value;
    }

    pub fn pixels(&self) -> &[Rgb] {
        &self.pixels
    }

    pub(crate) fn pixels_mut(&mut self) -> &mut [Rgb] {
        &mut self.pixels
    }

    fn index(&self, x: u32, y: u32) -> usize {
        debug_assert!(x < self.width && y < self.height);
        y as usize * self.width as usize + x as usize
    }
}

fn check_dims(width: u32, height: u32) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::NonPositive {
            name: "image dimension",
            value: if width == 0 {
                f64::from(width)
            } else {
                f64::from(height)
            },
        });
    }
    Ok(())
}

/// Encodes an image as canonical binary PPM.
pub fn save_ppm(image: &Image) -> Vec<u8> {
    let header = format!("P6\n{} {}\n255\n", image.width, image.height);
    let mut out = Vec::with_capacity(header.len() + image.pixels.len() * 3);
    out.extend_from_slice(header.as_bytes());
    for px in &image.pixels {
        out.extend_from_slice(px);
    }
    out
}

/// Decodes a binary PPM (P6, maxval 255). Errors name the offending byte offset.
pub fn load_ppm(bytes: &[u8]) -> Result<Image> {
    let mut cur = Scanner { bytes, pos: 0 };
    cur.expect(b"P6", "expected magic \"P6\"")?;
    let width = cur.read_header_int("width")?;
    let height = cur.read_header_int("height")?;
    let maxval = cur.read_header_int("maxval")?;
    if maxval != 255 {
        return Err(cur.err(format!("maxval must be 255, got {maxval}")));
    }
    // A single whitespace byte separates the header from the pixel data.
    cur.expect_single_whitespace()?;
    check_dims(width, height)
        .map_err(|_| cur.err("image dimensions must be at least 1x1".into()))?;

    let count = width as usize * height as usize;
    let need = count
        .checked_mul(3)
        .ok_or_else(|| cur.err("image dimensions overflow".into()))?;
    let data = &bytes[cur.pos..];
    if data.len() < need {
        return Err(cur.err(format!(
            "pixel data truncated: need {need} bytes, found {}",
            data.len()
        )));
    }
    if data.len() > need {
        return Err(Error::PpmParse {
            offset: cur.pos + need,
            reason: format!("{} trailing bytes after pixel data", data.len() - need),
        });
    }
    let pixels = data.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
    Ok(Image {
        width,
        height,
        pixels,
    })
}

struct Scanner<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Scanner<'_> {
    fn err(&self, reason: String) -> Error {
        Error::PpmParse {
            offset: self.pos,
            reason,
        }
    }

    fn expect(&mut self, token: &[u8], reason: &str) -> Result<()> {
        if self.bytes[self.pos..].starts_with(token) {
            self.pos += token.len();
            Ok(())
        } else {
            Err(self.err(reason.to_string()))
        }
    }

    fn skip_whitespace_and_comments(&mut self) -> Result<()> {
        let mut advanced = false;
        loop {
            match self.bytes.get(self.pos) {
                Some(b) if b.is_ascii_whitespace() => {
                    self.pos += 1;
                    advanced = true;
                }
                Some(b'#') => {
                    while let Some(&b) = self.bytes.get(self.pos) {
                        self.pos += 1;
                        if b == b'\n' {
                            break;
                        }
                    }
                    advanced = true;
                }
                _ => break,
            }
        }
        if advanced {
            Ok(())
        } else {
            Err(self.err("expected whitespace".into()))
        }
    }

    fn read_header_int(&mut self, what: &str) -> Result<u32> {
        self.skip_whitespace_and_comments()?;
        let start = self.pos;
        while matches!(self.bytes.get(self.pos), Some(b) if b.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err(format!("expected decimal {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::PpmParse {
                offset: start,
                reason: format!("{what} out of range"),
            })
    }

    fn expect_single_whitespace(&mut self) -> Result<()> {
        match self.bytes.get(self.pos) {
            Some(b) if b.is_ascii_whitespace() => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err("expected whitespace before pixel data".into())),
        }
    }
}
