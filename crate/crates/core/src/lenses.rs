//! Random lens selection.
//!
//! Instead of grid-searching the alpha/word-length space, an ensemble draws
//! `max(1, floor(p * l))` lenses uniformly for each of SAX and SFA.

use rand::Rng;

use crate::error::{Error, Result};
use crate::seed;

pub use crate::symbolic::{Lens, Representation};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LensSelectionConfig {
    /// Proportion of the series length drawn as lenses per representation.
    pub p: f64,
    pub alpha_min: usize,
    pub alpha_max: usize,
    pub w_min: usize,
    pub seed: u64,
}

impl Default for LensSelectionConfig {
    fn default() -> Self {
        LensSelectionConfig {
            p: 0.05,
            alpha_min: 3,
            alpha_max: 10,
            w_min: 2,
            seed: 0,
        }
    }
}

impl LensSelectionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(Error::invalid_input(format!("p = {} outside (0, 1]", self.p)));
        }
        if self.alpha_min < 2 || self.alpha_min > self.alpha_max {
            return Err(Error::invalid_input(format!(
                "alphabet bounds [{}, {}] need 2 <= min <= max",
                self.alpha_min, self.alpha_max
            )));
        }
        if self.w_min < 2 {
            return Err(Error::invalid_input(format!("w_min = {} < 2", self.w_min)));
        }
        Ok(())
    }

    /// Lenses per representation for series of length `l`.
    pub fn lenses_per_representation(&self, l: usize) -> usize {
        // The epsilon keeps products like 0.15 * 20 from flooring to 2.
        ((self.p * l as f64 + 1e-9).floor() as usize).max(1)
    }
}

/// Draws the SAX lenses followed by an equal number of SFA lenses for series
/// of length `series_length`.
pub fn draw_lenses(config: &LensSelectionConfig, series_length: usize) -> Result<Vec<Lens>> {
    draw_lenses_for(config, series_length, series_length)
}

/// Like [`draw_lenses`], but sizes the ensemble from `count_length` while
/// drawing word lengths up to `max_word_length`. The concatenating pipeline
/// counts lenses from the per-dimension length but words may span the whole
/// concatenated series.
pub fn draw_lenses_for(config: &LensSelectionConfig, count_length: usize, max_word_length: usize) -> Result<Vec<Lens>> {
    config.validate()?;
    if max_word_length < config.w_min {
        return Err(Error::invalid_input(format!(
            "series length {max_word_length} is shorter than w_min = {}",
            config.w_min
        )));
    }
    let per_rep = config.lenses_per_representation(count_length);
    let mut rng = seed::rng(config.seed);
    let mut lenses = Vec::with_capacity(2 * per_rep);
    for representation in [Representation::Sax, Representation::Sfa] {
        for _ in 0..per_rep {
            let alpha = rng.gen_range(config.alpha_min..=config.alpha_max);
            let mut word_length = rng.gen_range(config.w_min..=max_word_length);
            if representation == Representation::Sfa {
                word_length = (word_length & !1).max(2);
            }
            lenses.push(Lens {
                representation,
                alpha,
                word_length,
            });
        }
    }
    Ok(lenses)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(p: f64, seed: u64) -> LensSelectionConfig {
        LensSelectionConfig {
            p,
            seed,
            ..Default::default()
        }
    }

    fn count(lenses: &[Lens], rep: Representation) -> usize {
        lenses.iter().filter(|l| l.representation == rep).count()
    }

    #[test]
    fn lens_counts() {
        let lenses = draw_lenses(&config(0.05, 1), 100).unwrap();
        assert_eq!(count(&lenses, Representation::Sax), 5);
        assert_eq!(count(&lenses, Representation::Sfa), 5);
        assert!(lenses[..5].iter().all(|l| l.representation == Representation::Sax));

        let lenses = draw_lenses(&config(0.05, 1), 10).unwrap();
        assert_eq!(count(&lenses, Representation::Sax), 1);
        assert_eq!(count(&lenses, Representation::Sfa), 1);

        let lenses = draw_lenses(&config(0.15, 1), 20).unwrap();
        assert_eq!(lenses.len(), 6);
    }

    #[test]
    fn draws_are_deterministic_and_valid() {
        for seed in 0..50 {
            for l in [2usize, 3, 7, 64, 150] {
                let a = draw_lenses(&config(0.2, seed), l).unwrap();
                assert_eq!(a, draw_lenses(&config(0.2, seed), l).unwrap());
                assert_eq!(count(&a, Representation::Sax), count(&a, Representation::Sfa));
                for lens in &a {
                    lens.validate(l).unwrap();
                    assert!((3..=10).contains(&lens.alpha));
                }
            }
        }
    }

    #[test]
    fn concatenated_bounds_use_full_length() {
        let lenses = draw_lenses_for(&config(0.05, 4), 100, 500).unwrap();
        assert_eq!(lenses.len(), 10);
        for lens in &lenses {
            lens.validate(500).unwrap();
        }
    }

    #[test]
    fn alphabet_draws_are_uniform() {
        let cfg = LensSelectionConfig {
            p: 1.0,
            seed: 99,
            ..Default::default()
        };
        // 5000 lenses per representation, 10000 in total.
        let lenses = draw_lenses(&cfg, 5000).unwrap();
        assert_eq!(lenses.len(), 10_000);
        let mut freq = [0usize; 11];
        for lens in &lenses {
            freq[lens.alpha] += 1;
        }
        for (alpha, &f) in freq.iter().enumerate().skip(3) {
            let share = f as f64 / lenses.len() as f64;
            assert!((share - 0.125).abs() < 0.03, "alpha={alpha}: {share}");
        }
    }

    #[test]
    fn rejects_bad_config() {
        assert!(draw_lenses(&config(0.0, 0), 10).is_err());
        assert!(draw_lenses(&config(1.5, 0), 10).is_err());
        assert!(matches!(draw_lenses(&config(0.05, 0), 1), Err(Error::InvalidInput(_))));
        let bad = LensSelectionConfig {
            alpha_min: 5,
            alpha_max: 4,
            ..Default::default()
        };
        assert!(draw_lenses(&bad, 10).is_err());
    }
}
