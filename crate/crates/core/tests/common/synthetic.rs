//! Generated datasets with known labels.

use std::f64::consts::PI;
use std::fmt::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use redcomets::{Dataset, LabelEncoding};

/// Class 0 is one sine period over the series, class 1 is three. Dimension
/// `d` is phase shifted by `2 pi d / dims`; every value gets N(0, noise^2).
pub fn sines(seed: u64, count: usize, dims: usize, length: usize, noise: f64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, noise).unwrap();
    let mut instances = Vec::with_capacity(count);
    let mut labels = Vec::with_capacity(count);
    for i in 0..count {
        let class = i % 2;
        let cycles = if class == 0 { 1.0 } else { 3.0 };
        let instance = (0..dims)
            .map(|d| {
                let phase = 2.0 * PI * d as f64 / dims as f64;
                (0..length)
                    .map(|t| (2.0 * PI * cycles * t as f64 / length as f64 + phase).sin() + normal.sample(&mut rng))
                    .collect()
            })
            .collect();
        instances.push(instance);
        labels.push(class);
    }
    let encoding = LabelEncoding::from_classes(["0", "1"]).unwrap();
    Dataset::new("Sines", instances, labels, encoding).unwrap()
}

/// The separable benchmark problem: d=3, l=64, sigma=0.1, 100 train and 100
/// test instances.
pub fn sine_split(seed: u64) -> (Dataset, Dataset) {
    (sines(seed, 100, 3, 64, 0.1), sines(seed ^ 0x5eed, 100, 3, 64, 0.1))
}

/// Uniform noise with a weak class-dependent offset, every class present.
pub fn random_dataset(seed: u64, count: usize, dims: usize, length: usize, classes: usize) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut instances = Vec::with_capacity(count);
    let mut labels = Vec::with_capacity(count);
    for i in 0..count {
        let class = if i < classes { i } else { rng.gen_range(0..classes) };
        let instance = (0..dims)
            .map(|_| {
                (0..length)
                    .map(|t| rng.gen_range(-1.0..1.0) + (class * t) as f64 * 0.05)
                    .collect()
            })
            .collect();
        instances.push(instance);
        labels.push(class);
    }
    let encoding = LabelEncoding::from_classes((0..classes).map(|c| format!("c{c}"))).unwrap();
    Dataset::new("Random", instances, labels, encoding).unwrap()
}

/// Renders a dataset in the archive `.ts` text format.
pub fn to_ts(ds: &Dataset) -> String {
    let mut out = String::new();
    writeln!(out, "@problemName {}", ds.name()).unwrap();
    writeln!(out, "@univariate {}", ds.dims() == 1).unwrap();
    writeln!(out, "@dimensions {}", ds.dims()).unwrap();
    writeln!(out, "@equalLength true").unwrap();
    writeln!(out, "@seriesLength {}", ds.series_length()).unwrap();
    writeln!(out, "@classLabel true {}", ds.encoding().classes().join(" ")).unwrap();
    writeln!(out, "@data").unwrap();
    for i in 0..ds.len() {
        for d in 0..ds.dims() {
            let values: Vec<String> = ds.series(i, d).iter().map(|v| format!("{v:?}")).collect();
            write!(out, "{}:", values.join(",")).unwrap();
        }
        writeln!(out, "{}", ds.encoding().decode(ds.labels()[i]).unwrap()).unwrap();
    }
    out
}
