//! Property checks and input strategies shared by the property suite and the
//! acceptance harness.

use std::f64::consts::PI;

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use redcomets::bench::stats::{friedman_ranks, wilcoxon_signed_rank};
use redcomets::data::{stratified_resample, z_normalize, Dataset, LabelEncoding};
use redcomets::forest::{FeatureMatrix, ForestConfig, ProbabilityMatrix, RandomForest};
use redcomets::lenses::{draw_lenses, LensSelectionConfig};
use redcomets::symbolic::{dft, gaussian_breakpoints, mcb_fit, paa, sax_transform, Lens, Representation};
use redcomets::voting::{sum_rule_combine, weights_meanmax, weights_uniform, MatrixSet, WeightVector};

type Check = Result<(), TestCaseError>;

pub fn series(min_len: usize, max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e3f64..1e3, min_len..=max_len)
}

/// `k` row-stochastic `m x n` matrices.
pub fn matrix_set(max_k: usize, max_m: usize, max_n: usize) -> impl Strategy<Value = Vec<Vec<Vec<f64>>>> {
    (1..=max_k, 1..=max_m, 2..=max_n).prop_flat_map(|(k, m, n)| {
        prop::collection::vec(prop::collection::vec(prop::collection::vec(0.01f64..1.0, n), m), k).prop_map(|set| {
            set.into_iter()
                .map(|mat| {
                    mat.into_iter()
                        .map(|row| {
                            let s: f64 = row.iter().sum();
                            row.into_iter().map(|v| v / s).collect()
                        })
                        .collect()
                })
                .collect()
        })
    })
}

pub fn signed_diffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(
        prop::sample::select(vec![-3.0, -2.0, -1.5, -1.0, 0.0, 1.0, 1.5, 2.0, 3.0, 4.0]),
        1..=12,
    )
}

pub fn distinct_column() -> impl Strategy<Value = Vec<f64>> {
    // Equal-count bins are only possible without ties.
    prop::collection::btree_set(-100_000i64..100_000, 10..200)
        .prop_map(|set| set.into_iter().map(|v| v as f64 / 7.0).collect())
}

pub fn small_forest_input() -> impl Strategy<Value = (Vec<Vec<u32>>, u64, u64)> {
    (
        prop::collection::vec(prop::collection::vec(0u32..4, 3), 6..20),
        any::<u64>(),
        any::<u64>(),
    )
}

fn naive_dft(x: &[f64], count: usize) -> Vec<(f64, f64)> {
    let l = x.len() as f64;
    (0..count)
        .map(|k| {
            x.iter().enumerate().fold((0.0, 0.0), |(re, im), (t, &v)| {
                let angle = -2.0 * PI * k as f64 * t as f64 / l;
                (re + v * angle.cos(), im + v * angle.sin())
            })
        })
        .collect()
}

fn to_set(raw: &[Vec<Vec<f64>>]) -> MatrixSet {
    MatrixSet::new(
        raw.iter()
            .map(|m| ProbabilityMatrix::from_rows(m.clone()).unwrap())
            .collect(),
    )
    .unwrap()
}

fn brute_argmax(sum: &[f64]) -> usize {
    let mut best = 0;
    for j in 1..sum.len() {
        if sum[j] > sum[best] {
            best = j;
        }
    }
    best
}

/// Average ranks by counting, then every one of the `2^n` sign patterns.
pub fn brute_wilcoxon(diffs: &[f64]) -> f64 {
    let d: Vec<f64> = diffs.iter().copied().filter(|v| *v != 0.0).collect();
    let n = d.len();
    if n == 0 {
        return 1.0;
    }
    let ranks: Vec<f64> = d
        .iter()
        .map(|x| {
            let below = d.iter().filter(|y| y.abs() < x.abs()).count() as f64;
            let equal = d.iter().filter(|y| y.abs() == x.abs()).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect();
    let total: f64 = ranks.iter().sum();
    let observed: f64 = ranks.iter().zip(&d).filter(|(_, x)| **x > 0.0).map(|(r, _)| r).sum();
    let dev = (observed - total / 2.0).abs();
    let mut extreme = 0u64;
    for mask in 0u32..(1 << n) {
        let w: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        if (w - total / 2.0).abs() >= dev - 1e-9 {
            extreme += 1;
        }
    }
    extreme as f64 / (1u64 << n) as f64
}

pub fn z_normalize_idempotent(x: &[f64]) -> Check {
    let once = z_normalize(x).unwrap();
    let twice = z_normalize(&once).unwrap();
    for (a, b) in once.iter().zip(&twice) {
        prop_assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
    }
    let mean = once.iter().sum::<f64>() / once.len() as f64;
    prop_assert!(mean.abs() < 1e-9);
    Ok(())
}

pub fn paa_shape_identity_mean(x: &[f64], w_frac: f64) -> Check {
    let l = x.len();
    let w = 1 + ((l - 1) as f64 * w_frac) as usize;
    let out = paa(x, w).unwrap();
    prop_assert_eq!(out.len(), w);
    prop_assert_eq!(paa(x, l).unwrap(), x.to_vec());
    // Every frame covers l/w timesteps, so frame means average to the series mean.
    let mean_in = x.iter().sum::<f64>() / l as f64;
    let mean_out = out.iter().sum::<f64>() / w as f64;
    prop_assert!((mean_in - mean_out).abs() <= 1e-9 * (1.0 + mean_in.abs()));
    Ok(())
}

pub fn dft_matches_oracle(x: &[f64], frac: f64) -> Check {
    let count = 1 + ((x.len() / 2) as f64 * frac) as usize;
    let fast = dft(x, count).unwrap();
    prop_assert_eq!(fast.len(), count);
    for (c, (re, im)) in fast.iter().zip(naive_dft(x, count)) {
        prop_assert!(
            (c.re - re).abs() <= 1e-9 && (c.im - im).abs() <= 1e-9,
            "{c} vs {re}+{im}i"
        );
    }
    Ok(())
}

pub fn dft_linear(x: &[f64], y: &[f64], a: f64) -> Check {
    let k = x.len() / 2 + 1;
    let combo: Vec<f64> = x.iter().zip(y).map(|(p, q)| a * p + q).collect();
    let (fx, fy, fc) = (dft(x, k).unwrap(), dft(y, k).unwrap(), dft(&combo, k).unwrap());
    for i in 0..k {
        prop_assert!((fc[i] - (fx[i] * a + fy[i])).norm() <= 1e-9);
    }
    Ok(())
}

pub fn mcb_balanced(column: &[f64], alpha: usize) -> Check {
    prop_assume!(column.len() >= alpha);
    let bins = mcb_fit(&[column.to_vec()], alpha).unwrap();
    let thresholds = &bins.thresholds()[0];
    prop_assert!(thresholds.windows(2).all(|w| w[0] <= w[1]));
    let mut counts = vec![0usize; alpha];
    for v in column {
        counts[thresholds.iter().filter(|t| **t <= *v).count()] += 1;
    }
    let (lo, hi) = (counts.iter().min().unwrap(), counts.iter().max().unwrap());
    prop_assert!(hi - lo <= 1, "{counts:?}");
    Ok(())
}

pub fn forest_rows_sum_to_one(rows: &[Vec<u32>], labels_seed: u64, seed: u64) -> Check {
    let y: Vec<usize> = (0..rows.len())
        .map(|i| ((labels_seed >> (i % 64)) as usize + i) % 3)
        .collect();
    prop_assume!(y.iter().any(|&c| c != y[0]));
    let x = FeatureMatrix::from_rows(rows).unwrap();
    let forest = RandomForest::fit(
        &x,
        &y,
        3,
        &ForestConfig {
            trees: 5,
            bootstrap: true,
        },
        seed,
    )
    .unwrap();
    let proba = forest.predict_proba(&x).unwrap();
    for i in 0..proba.rows() {
        let s: f64 = proba.row(i).iter().sum();
        prop_assert!((s - 1.0).abs() <= 1e-9);
        prop_assert!(proba.row(i).iter().all(|p| (0.0..=1.0).contains(p)));
    }
    Ok(())
}

pub fn sum_rule_scale_permutation(raw: &[Vec<Vec<f64>>], w: &[f64], scale: f64, rot: usize) -> Check {
    let k = raw.len();
    let set = to_set(raw);
    let labels = sum_rule_combine(&set, &WeightVector::new(w[..k].to_vec()).unwrap()).unwrap();

    let scaled = WeightVector::new(w[..k].iter().map(|v| v * scale).collect()).unwrap();
    prop_assert_eq!(&sum_rule_combine(&set, &scaled).unwrap(), &labels);

    let r = rot % k;
    let mut raw_rot = raw.to_vec();
    raw_rot.rotate_left(r);
    let mut w_rot = w[..k].to_vec();
    w_rot.rotate_left(r);
    let permuted = sum_rule_combine(&to_set(&raw_rot), &WeightVector::new(w_rot).unwrap()).unwrap();
    prop_assert_eq!(permuted, labels);
    Ok(())
}

pub fn uniform_matches_brute_force(raw: &[Vec<Vec<f64>>]) -> Check {
    let set = to_set(raw);
    let labels = sum_rule_combine(&set, &weights_uniform(&set)).unwrap();
    let n = raw[0][0].len();
    for (j, &label) in labels.iter().enumerate() {
        let sum: Vec<f64> = (0..n).map(|c| raw.iter().map(|m| m[j][c]).sum()).collect();
        prop_assert_eq!(label, brute_argmax(&sum));
    }
    Ok(())
}

pub fn meanmax_bounded(raw: &[Vec<Vec<f64>>]) -> Check {
    let set = to_set(raw);
    let n = raw[0][0].len() as f64;
    for &wt in weights_meanmax(&set).unwrap().as_slice() {
        prop_assert!(wt >= 1.0 / n - 1e-12 && wt <= 1.0 + 1e-12);
    }
    Ok(())
}

pub fn wilcoxon_matches_enumeration(diffs: &[f64]) -> Check {
    let zeros = vec![0.0; diffs.len()];
    let p = wilcoxon_signed_rank(diffs, &zeros).unwrap();
    let oracle = brute_wilcoxon(diffs);
    prop_assert!((p - oracle).abs() < 1e-12, "{p} vs {oracle} for {diffs:?}");
    prop_assert_eq!(p, wilcoxon_signed_rank(&zeros, diffs).unwrap());
    Ok(())
}

pub fn rank_sums_triangular(grid: &[Vec<f64>]) -> Check {
    let c = grid.len() as f64;
    let table = friedman_ranks(grid).unwrap();
    for d in 0..grid[0].len() {
        let sum: f64 = table.ranks.iter().map(|r| r[d]).sum();
        prop_assert!((sum - c * (c + 1.0) / 2.0).abs() < 1e-9);
    }
    Ok(())
}

pub fn sax_affine_invariant(x: &[f64], a: f64, b: f64, alpha: usize, w_frac: f64) -> Check {
    let w = 2 + ((x.len() - 2) as f64 * w_frac) as usize;
    let z = z_normalize(x).unwrap();
    prop_assume!(z.iter().any(|v| *v != 0.0));
    // Symbols can legitimately flip when a frame mean sits on a breakpoint.
    let breakpoints = gaussian_breakpoints(alpha).unwrap();
    let frames = paa(&z, w).unwrap();
    prop_assume!(frames
        .iter()
        .all(|f| breakpoints.iter().all(|bp| (f - bp).abs() > 1e-6)));
    let lens = Lens::sax(alpha, w);
    let y: Vec<f64> = x.iter().map(|v| a * v + b).collect();
    prop_assert_eq!(sax_transform(x, &lens).unwrap(), sax_transform(&y, &lens).unwrap());
    Ok(())
}

pub fn lens_draws_bounded(l: usize, p: f64, alpha_min: usize, alpha_span: usize, seed: u64) -> Check {
    let cfg = LensSelectionConfig {
        p,
        alpha_min,
        alpha_max: alpha_min + alpha_span,
        w_min: 2,
        seed,
    };
    let lenses = draw_lenses(&cfg, l).unwrap();
    let k = ((p * l as f64 + 1e-9).floor() as usize).max(1);
    prop_assert_eq!(lenses.len(), 2 * k);
    for (i, lens) in lenses.iter().enumerate() {
        let expected = if i < k {
            Representation::Sax
        } else {
            Representation::Sfa
        };
        prop_assert_eq!(lens.representation, expected);
        prop_assert!(lens.alpha >= cfg.alpha_min && lens.alpha <= cfg.alpha_max);
        prop_assert!(lens.validate(l).is_ok());
    }
    prop_assert_eq!(&draw_lenses(&cfg, l).unwrap(), &lenses);
    Ok(())
}

pub fn resample_partitions(train_labels: &[usize], test_labels: &[usize], index: usize) -> Check {
    prop_assume!((0..3).all(|c| train_labels.iter().chain(test_labels).any(|&l| l == c)));
    let encoding = LabelEncoding::from_classes(["a", "b", "c"]).unwrap();
    let make = |labels: &[usize], offset: usize| {
        let instances = (0..labels.len())
            .map(|i| vec![vec![(offset + i) as f64, 0.0]])
            .collect();
        Dataset::new("p", instances, labels.to_vec(), encoding.clone()).unwrap()
    };
    let train = make(train_labels, 0);
    let test = make(test_labels, train_labels.len());
    let plan = stratified_resample(&train, &test, index).unwrap();
    let mut all: Vec<usize> = plan.train_indices.iter().chain(&plan.test_indices).copied().collect();
    all.sort_unstable();
    prop_assert_eq!(all, (0..train.len() + test.len()).collect::<Vec<_>>());
    let (rtrain, rtest) = plan.apply(&train, &test);
    prop_assert_eq!(rtrain.class_counts(), train.class_counts());
    prop_assert_eq!(rtest.len(), test.len());
    if index == 0 {
        prop_assert_eq!(rtrain.labels(), train.labels());
    }
    Ok(())
}
