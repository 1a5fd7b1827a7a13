//! In-memory 8-bit gray images and binary masks.

use crate::histogram::{Histogram, DEFAULT_LEVELS};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    /// Returns `None` unless `pixels.len() == width * height` and both
    /// dimensions are positive.
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Option<Self> {
        (width > 0 && height > 0 && width.checked_mul(height) == Some(pixels.len())).then_some(
            Self {
                width,
                height,
                pixels,
            },
        )
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Option<Self> {
        Self::new(width, height, vec![value; width.checked_mul(height)?])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Row-major samples.
    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn same_size<T: Dimensions>(&self, other: &T) -> bool {
        self.width == other.dims().0 && self.height == other.dims().1
    }
}

/// Pixel counts over 256 gray levels.
pub fn histogram_of(img: &GrayImage) -> Histogram {
    let mut counts = vec![0u64; DEFAULT_LEVELS];
    for &p in &img.pixels {
        counts[p as usize] += 1;
    }
    Histogram::new(counts).expect("images have at least one pixel")
}

pub trait Dimensions {
    fn dims(&self) -> (usize, usize);
}

impl Dimensions for GrayImage {
    fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }
}

impl Dimensions for BinaryMask {
    fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }
}

/// Which side of a threshold counts as foreground.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Polarity {
    /// Foreground is brighter than the threshold.
    #[default]
    Above,
    /// Foreground is at or below the threshold.
    Below,
}

/// Row-major foreground flags (`true` = foreground).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Option<Self> {
        (width > 0 && height > 0 && width.checked_mul(height) == Some(bits.len())).then_some(Self {
            width,
            height,
            bits,
        })
    }

    /// Foreground where `pixel > threshold` (or `<=` for [`Polarity::Below`]).
    pub fn from_threshold(img: &GrayImage, threshold: u8, polarity: Polarity) -> Self {
        let bits = img
            .pixels
            .iter()
            .map(|&p| (p > threshold) == (polarity == Polarity::Above))
            .collect();
        Self {
            width: img.width,
            height: img.height,
            bits,
        }
    }

    /// Foreground where the pixel is nonzero; [`Polarity::Below`] inverts.
    pub fn from_nonzero(img: &GrayImage, polarity: Polarity) -> Self {
        Self::from_threshold(img, 0, polarity)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn foreground_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn complement(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    /// 0 for background, 255 for foreground.
    pub fn to_image(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            pixels: self.bits.iter().map(|&b| if b { 255 } else { 0 }).collect(),
        }
    }
}
