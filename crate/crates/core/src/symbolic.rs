//! SAX and SFA: the two discretizations that turn a real-valued series into a
//! fixed-length word over a small alphabet.
//!
//! Both start from the z-normalized series. SAX averages `w` equal-width
//! frames and quantizes each mean against equiprobable standard-normal
//! breakpoints. SFA takes the first `w / 2` Fourier coefficients, lays out
//! their real and imaginary parts as `w` features, and quantizes each feature
//! against per-position thresholds learned from training data (multiple
//! coefficient binning, MCB).
//!
//! Quantization always counts the thresholds that are `<=` the value, so a
//! value sitting exactly on a threshold takes the higher symbol.

use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use statrs::function::erf::erfc_inv;

use crate::data::z_normalize_finite;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Representation {
    Sax,
    Sfa,
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Representation::Sax => "SAX",
            Representation::Sfa => "SFA",
        })
    }
}

/// One symbolic view of a series: representation, alphabet size and word
/// length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Lens {
    pub representation: Representation,
    pub alpha: usize,
    pub word_length: usize,
}

impl Lens {
    pub fn sax(alpha: usize, word_length: usize) -> Self {
        Lens {
            representation: Representation::Sax,
            alpha,
            word_length,
        }
    }

    pub fn sfa(alpha: usize, word_length: usize) -> Self {
        Lens {
            representation: Representation::Sfa,
            alpha,
            word_length,
        }
    }

    /// Checks the lens against series of length `series_length`.
    pub fn validate(&self, series_length: usize) -> Result<()> {
        if self.alpha < 2 {
            return Err(Error::invalid_lens(format!("alphabet size {} < 2", self.alpha)));
        }
        if self.alpha > u32::MAX as usize {
            return Err(Error::invalid_lens(format!("alphabet size {} too large", self.alpha)));
        }
        if self.word_length < 1 {
            return Err(Error::invalid_lens("word length must be >= 1"));
        }
        if self.word_length > series_length {
            return Err(Error::invalid_lens(format!(
                "word length {} exceeds series length {series_length}",
                self.word_length
            )));
        }
        if self.representation == Representation::Sfa && !self.word_length.is_multiple_of(2) {
            return Err(Error::invalid_lens(format!(
                "SFA word length {} must be even",
                self.word_length
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Lens {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}, {}, {}>", self.representation, self.alpha, self.word_length)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymbolicWord(Vec<u32>);

impl SymbolicWord {
    pub fn symbols(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Piecewise aggregate approximation: the means of `w` equal-width frames.
///
/// When `w` does not divide the length, a timestep straddling a frame
/// boundary contributes to both frames in proportion to its overlap.
pub fn paa(values: &[f64], w: usize) -> Result<Vec<f64>> {
    let l = values.len();
    if w == 0 || w > l {
        return Err(Error::invalid_lens(format!("PAA needs 1 <= w <= {l}, got {w}")));
    }
    if w == l {
        return Ok(values.to_vec());
    }
    if l.is_multiple_of(w) {
        let frame = l / w;
        return Ok(values
            .chunks_exact(frame)
            .map(|c| c.iter().sum::<f64>() / frame as f64)
            .collect());
    }
    // In units of 1/w timesteps, frame i spans [i*l, (i+1)*l) and timestep t
    // spans [t*w, (t+1)*w), so every overlap is an integer.
    let mut out = Vec::with_capacity(w);
    for i in 0..w {
        let (lo, hi) = (i * l, (i + 1) * l);
        let mut acc = 0.0;
        for (t, &v) in values.iter().enumerate().take(hi.div_ceil(w)).skip(lo / w) {
            let overlap = hi.min((t + 1) * w) - lo.max(t * w);
            acc += overlap as f64 * v;
        }
        out.push(acc / l as f64);
    }
    Ok(out)
}

/// Standard normal inverse CDF.
fn probit(p: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

/// The `alpha - 1` breakpoints cutting the standard normal into `alpha`
/// equiprobable regions.
pub fn gaussian_breakpoints(alpha: usize) -> Result<Vec<f64>> {
    if alpha < 2 {
        return Err(Error::invalid_lens(format!("alphabet size {alpha} < 2")));
    }
    Ok((1..alpha)
        .map(|j| {
            if 2 * j == alpha {
                0.0
            } else {
                probit(j as f64 / alpha as f64)
            }
        })
        .collect())
}

/// Symbol for `value` under non-decreasing `thresholds`.
#[inline]
fn quantize(value: f64, thresholds: &[f64]) -> u32 {
    thresholds.partition_point(|&t| t <= value) as u32
}

pub fn sax_transform(values: &[f64], lens: &Lens) -> Result<SymbolicWord> {
    if lens.representation != Representation::Sax {
        return Err(Error::invalid_lens(format!("{lens} is not a SAX lens")));
    }
    lens.validate(values.len())?;
    let breakpoints = gaussian_breakpoints(lens.alpha)?;
    sax_with_breakpoints(values, lens.word_length, &breakpoints)
}

fn sax_with_breakpoints(values: &[f64], w: usize, breakpoints: &[f64]) -> Result<SymbolicWord> {
    check_finite(values)?;
    let normalized = z_normalize_finite(values);
    let frames = paa(&normalized, w)?;
    Ok(SymbolicWord(frames.iter().map(|&v| quantize(v, breakpoints)).collect()))
}

fn check_finite(values: &[f64]) -> Result<()> {
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid_input("series must be non-empty and finite"));
    }
    Ok(())
}

/// Planned forward FFT returning the leading coefficients of a fixed-length
/// series.
#[derive(Clone)]
pub struct FourierExtractor {
    fft: Arc<dyn Fft<f64>>,
    length: usize,
    count: usize,
}

impl fmt::Debug for FourierExtractor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FourierExtractor")
            .field("length", &self.length)
            .field("count", &self.count)
            .finish()
    }
}

impl FourierExtractor {
    pub fn new(length: usize, count: usize) -> Result<Self> {
        if length == 0 || count == 0 || count > length / 2 + 1 {
            return Err(Error::invalid_input(format!(
                "cannot take {count} DFT coefficients of a length-{length} series"
            )));
        }
        let fft = FftPlanner::new().plan_fft_forward(length);
        Ok(FourierExtractor { fft, length, count })
    }

    /// Unnormalized coefficients `X_k = sum_t x_t e^{-2 pi i k t / l}` for
    /// `k < count`.
    pub fn coefficients(&self, values: &[f64]) -> Result<Vec<Complex64>> {
        if values.len() != self.length {
            return Err(Error::invalid_input(format!(
                "series length {} does not match planned length {}",
                values.len(),
                self.length
            )));
        }
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft.process(&mut buf);
        buf.truncate(self.count);
        Ok(buf)
    }

    /// Interleaved `[Re X_0, Im X_0, Re X_1, ...]` of the z-normalized series.
    fn features(&self, values: &[f64]) -> Result<Vec<f64>> {
        check_finite(values)?;
        let coeffs = self.coefficients(&z_normalize_finite(values))?;
        Ok(coeffs.iter().flat_map(|c| [c.re, c.im]).collect())
    }
}

/// The first `coefficient_count` DFT coefficients of `values`.
pub fn dft(values: &[f64], coefficient_count: usize) -> Result<Vec<Complex64>> {
    FourierExtractor::new(values.len(), coefficient_count)?.coefficients(values)
}

/// Per-position SFA thresholds: `w` rows of `alpha - 1` non-decreasing
/// values.
#[derive(Debug, Clone, PartialEq)]
pub struct McbBins {
    alpha: usize,
    thresholds: Vec<Vec<f64>>,
}

impl McbBins {
    pub fn alpha(&self) -> usize {
        self.alpha
    }

    pub fn word_length(&self) -> usize {
        self.thresholds.len()
    }

    pub fn thresholds(&self) -> &[Vec<f64>] {
        &self.thresholds
    }

    fn quantize(&self, features: &[f64]) -> SymbolicWord {
        SymbolicWord(
            features
                .iter()
                .zip(&self.thresholds)
                .map(|(&v, row)| quantize(v, row))
                .collect(),
        )
    }
}

/// Equi-depth binning of each training column into `alpha` bins of equal
/// count (within one). Each threshold is the midpoint of the two sorted
/// values straddling its bin boundary.
pub fn mcb_fit(columns: &[Vec<f64>], alpha: usize) -> Result<McbBins> {
    if alpha < 2 {
        return Err(Error::invalid_lens(format!("alphabet size {alpha} < 2")));
    }
    if columns.is_empty() {
        return Err(Error::invalid_input("MCB needs at least one column"));
    }
    let thresholds = columns
        .iter()
        .enumerate()
        .map(|(pos, column)| {
            if column.is_empty() {
                return Err(Error::invalid_input(format!("MCB column {pos} is empty")));
            }
            if column.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid_input(format!("MCB column {pos} has non-finite values")));
            }
            let mut sorted = column.clone();
            sorted.sort_by(f64::total_cmp);
            let n = sorted.len();
            Ok((1..alpha)
                .map(|j| {
                    let boundary = j * n / alpha;
                    if boundary == 0 {
                        sorted[0]
                    } else {
                        0.5 * (sorted[boundary - 1] + sorted[boundary])
                    }
                })
                .collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(McbBins { alpha, thresholds })
}

pub fn sfa_transform(values: &[f64], lens: &Lens, bins: &McbBins) -> Result<SymbolicWord> {
    if lens.representation != Representation::Sfa {
        return Err(Error::invalid_lens(format!("{lens} is not an SFA lens")));
    }
    lens.validate(values.len())?;
    if bins.alpha != lens.alpha || bins.word_length() != lens.word_length {
        return Err(Error::invalid_input(format!(
            "bins fitted for alpha={} w={} used with lens {lens}",
            bins.alpha,
            bins.word_length()
        )));
    }
    let extractor = FourierExtractor::new(values.len(), lens.word_length / 2)?;
    Ok(bins.quantize(&extractor.features(values)?))
}

/// A lens together with whatever it learned from training data.
#[derive(Debug, Clone)]
pub enum FittedTransform {
    Sax {
        lens: Lens,
        breakpoints: Vec<f64>,
    },
    Sfa {
        lens: Lens,
        extractor: FourierExtractor,
        bins: McbBins,
    },
}

impl FittedTransform {
    /// Fits the lens on `train`, every series of which must share a length.
    pub fn fit(lens: Lens, train: &[&[f64]]) -> Result<Self> {
        let length = train
            .first()
            .map(|s| s.len())
            .ok_or_else(|| Error::invalid_input("cannot fit a transform on no series"))?;
        if train.iter().any(|s| s.len() != length) {
            return Err(Error::invalid_input("training series have differing lengths"));
        }
        lens.validate(length)?;
        match lens.representation {
            Representation::Sax => Ok(FittedTransform::Sax {
                lens,
                breakpoints: gaussian_breakpoints(lens.alpha)?,
            }),
            Representation::Sfa => {
                let extractor = FourierExtractor::new(length, lens.word_length / 2)?;
                let mut columns = vec![Vec::with_capacity(train.len()); lens.word_length];
                for series in train {
                    for (col, v) in columns.iter_mut().zip(extractor.features(series)?) {
                        col.push(v);
                    }
                }
                let bins = mcb_fit(&columns, lens.alpha)?;
                Ok(FittedTransform::Sfa { lens, extractor, bins })
            }
        }
    }

    pub fn lens(&self) -> &Lens {
        match self {
            FittedTransform::Sax { lens, .. } | FittedTransform::Sfa { lens, .. } => lens,
        }
    }

    /// Length of the series this transform accepts.
    pub fn transform(&self, values: &[f64]) -> Result<SymbolicWord> {
        match self {
            FittedTransform::Sax { lens, breakpoints } => {
                lens.validate(values.len())?;
                sax_with_breakpoints(values, lens.word_length, breakpoints)
            }
            FittedTransform::Sfa { extractor, bins, .. } => Ok(bins.quantize(&extractor.features(values)?)),
        }
    }
}
