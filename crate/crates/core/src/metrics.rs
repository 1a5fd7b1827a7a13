//! Quantization and segmentation quality measures: misclassification error,
//! relative foreground area error, MSE and PSNR.

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::image::{BinaryMask, Dimensions, GrayImage};
use crate::thresholds::ThresholdSet;

/// Fixed PSNR peak for 8-bit data.
pub const PEAK: f64 = 255.0;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("gray level {gray} is outside the threshold domain 0..{levels}")]
    RangeMismatch { gray: u8, levels: usize },
}

fn check_dims<A: Dimensions, B: Dimensions>(a: &A, b: &B) -> Result<(), MetricsError> {
    if a.dims() == b.dims() {
        Ok(())
    } else {
        Err(MetricsError::DimensionMismatch {
            left: a.dims(),
            right: b.dims(),
        })
    }
}

/// Replaces every pixel by the real-valued mean of its class.
pub fn quantize_real(img: &GrayImage, t: &ThresholdSet) -> Result<Vec<f64>, MetricsError> {
    img.pixels()
        .iter()
        .map(|&p| {
            t.class_of(p.into())
                .map(|k| t.means()[k])
                .ok_or(MetricsError::RangeMismatch {
                    gray: p,
                    levels: t.levels(),
                })
        })
        .collect()
}

/// Rounds half up and clamps to the 8-bit range.
pub fn round_gray(value: f64) -> u8 {
    (value + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// Replaces every pixel by its class mean rounded half up.
pub fn quantize(img: &GrayImage, t: &ThresholdSet) -> Result<GrayImage, MetricsError> {
    let rounded: Vec<u8> = t.means().iter().map(|&m| round_gray(m)).collect();
    let pixels = img
        .pixels()
        .iter()
        .map(|&p| {
            t.class_of(p.into())
                .map(|k| rounded[k])
                .ok_or(MetricsError::RangeMismatch {
                    gray: p,
                    levels: t.levels(),
                })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(GrayImage::new(img.width(), img.height(), pixels).expect("same dimensions"))
}

/// Fraction of pixels whose foreground/background label differs.
pub fn misclassification_error(
    reference: &BinaryMask,
    test: &BinaryMask,
) -> Result<f64, MetricsError> {
    check_dims(reference, test)?;
    let agree = reference
        .bits()
        .iter()
        .zip(test.bits())
        .filter(|(a, b)| a == b)
        .count();
    Ok(1.0 - agree as f64 / reference.bits().len() as f64)
}

/// Normalized difference of foreground areas. Both areas zero gives 0.
pub fn relative_area_error(reference: &BinaryMask, test: &BinaryMask) -> Result<f64, MetricsError> {
    check_dims(reference, test)?;
    let a_ref = reference.foreground_count() as f64;
    let a_test = test.foreground_count() as f64;
    Ok(if a_ref > a_test {
        (a_ref - a_test) / a_ref
    } else if a_test > 0.0 {
        (a_test - a_ref) / a_test
    } else {
        0.0
    })
}

/// Mean squared error and PSNR in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Psnr {
    pub mse: f64,
    /// `+inf` when `mse` is zero.
    pub db: f64,
}

impl Psnr {
    pub fn from_mse(mse: f64) -> Self {
        let db = if mse == 0.0 {
            f64::INFINITY
        } else {
            10.0 * (PEAK * PEAK / mse).log10()
        };
        Self { mse, db }
    }
}

/// PSNR of `src` against a real-valued reconstruction of the same size.
pub fn psnr(src: &GrayImage, reconstruction: &[f64]) -> Result<Psnr, MetricsError> {
    if reconstruction.len() != src.len() {
        return Err(MetricsError::DimensionMismatch {
            left: src.dims(),
            right: (reconstruction.len(), 1),
        });
    }
    let sse: f64 = src
        .pixels()
        .iter()
        .zip(reconstruction)
        .map(|(&s, &t)| {
            let e = f64::from(s) - t;
            e * e
        })
        .sum();
    Ok(Psnr::from_mse(sse / src.len() as f64))
}

/// PSNR between two 8-bit images.
pub fn psnr_images(src: &GrayImage, test: &GrayImage) -> Result<Psnr, MetricsError> {
    check_dims(src, test)?;
    let recon: Vec<f64> = test.pixels().iter().map(|&p| p.into()).collect();
    psnr(src, &recon)
}

pub(crate) fn finite_or_null<S: Serializer>(value: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match value {
        Some(v) if v.is_finite() => s.serialize_f64(*v),
        _ => s.serialize_none(),
    }
}

/// `psnr_db` is `null` both when PSNR was not computed and when it is
/// infinite; `mse` tells the two apart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricsReport {
    pub me: f64,
    pub rae: f64,
    pub mse: Option<f64>,
    #[serde(serialize_with = "finite_or_null")]
    pub psnr_db: Option<f64>,
}

impl MetricsReport {
    pub fn evaluate(
        reference: &BinaryMask,
        test: &BinaryMask,
        quality: Option<(&GrayImage, &GrayImage)>,
    ) -> Result<Self, MetricsError> {
        let me = misclassification_error(reference, test)?;
        let rae = relative_area_error(reference, test)?;
        let p = quality.map(|(src, t)| psnr_images(src, t)).transpose()?;
        Ok(Self {
            me,
            rae,
            mse: p.map(|p| p.mse),
            psnr_db: p.map(|p| p.db),
        })
    }
}
