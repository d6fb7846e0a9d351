//! 8-bit grayscale images in PGM (`P2` ASCII and `P5` binary) form.

use std::path::Path;

use crate::error::{Error, Result};
use crate::io::atomic_write;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Image(format!("empty image {width}×{height}")));
        }
        if pixels.len() != width * height {
            return Err(Error::Image(format!(
                "{width}×{height} image needs {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> u8,
    ) -> Result<Self> {
        let mut px = Vec::with_capacity(width * height);
        for i in 0..height {
            for j in 0..width {
                px.push(f(i, j));
            }
        }
        Self::new(width, height, px)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Row-major pixels.
    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    /// Pixel at row `i`, column `j`.
    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.pixels[i * self.width + j]
    }

    pub fn same_shape(&self, other: &GrayImage) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn parse_pgm(bytes: &[u8]) -> Result<Self> {
        let mut cur = Cursor { bytes, pos: 0 };
        let magic = cur.token()?;
        let binary = match magic.as_slice() {
            b"P5" => true,
            b"P2" => false,
            other => {
                return Err(Error::Image(format!(
                    "not a grayscale PGM (magic {:?})",
                    String::from_utf8_lossy(other)
                )))
            }
        };
        let width = cur.number()?;
        let height = cur.number()?;
        let maxval = cur.number()?;
        if maxval == 0 || maxval > 255 {
            return Err(Error::Image(format!(
                "only 8-bit PGM is supported (maxval {maxval})"
            )));
        }
        let n = width
            .checked_mul(height)
            .ok_or_else(|| Error::Image("image dimensions overflow".into()))?;
        let pixels = if binary {
            // Exactly one whitespace byte separates the header from raster data.
            cur.pos += 1;
            let data = bytes
                .get(cur.pos..cur.pos + n)
                .ok_or_else(|| Error::Image("truncated P5 raster".into()))?;
            data.to_vec()
        } else {
            (0..n)
                .map(|_| cur.number())
                .collect::<Result<Vec<usize>>>()?
                .into_iter()
                .map(|v| {
                    if v > maxval {
                        Err(Error::Image(format!("sample {v} exceeds maxval {maxval}")))
                    } else {
                        Ok(v as u8)
                    }
                })
                .collect::<Result<Vec<u8>>>()?
        };
        if pixels.iter().any(|&p| p as usize > maxval) {
            return Err(Error::Image(format!("sample exceeds maxval {maxval}")));
        }
        Self::new(width, height, pixels)
    }

    pub fn to_p5(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn to_p2(&self) -> String {
        let mut out = format!("P2\n{} {}\n255\n", self.width, self.height);
        for row in self.pixels.chunks(self.width) {
            let line: Vec<String> = row.iter().map(|p| p.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path)?;
        Self::parse_pgm(&bytes).map_err(|e| match e {
            Error::Image(m) => Error::Image(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Writes a binary PGM atomically.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        atomic_write(path.as_ref(), &self.to_p5())
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_space(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Result<Vec<u8>> {
        self.skip_space();
        let start = self.pos;
        while self
            .bytes
            .get(self.pos)
            .is_some_and(|b| !b.is_ascii_whitespace() && *b != b'#')
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Image("unexpected end of PGM header".into()));
        }
        Ok(self.bytes[start..self.pos].to_vec())
    }

    fn number(&mut self) -> Result<usize> {
        let t = self.token()?;
        std::str::from_utf8(&t)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Image(format!("bad number {:?}", String::from_utf8_lossy(&t))))
    }
}
