//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Pass criterion numbers as arguments to run a subset,
//! e.g. `cargo test --test acceptance -- 3 9`.

use std::f64::consts::PI;
use std::process::Command;
use std::time::Instant;

use demix::diagnostics::link_constants;
use demix::harness::{
    build_instance, recipe, run_phase_grid, run_trial, trial_seed, write_grid_to, TrialSpec,
};
use demix::links::{Link, LinkKind};
use demix::measurement::{observe, EnsembleKind, MeasurementOperator, NoiseSpec};
use demix::par::Execution;
use demix::rng::{derive_seed, rng_from_seed, standard_normal};
use demix::solvers::{
    dht, dht_observed, hard_threshold, l2_norm, Algorithm, DemixProblem, Init, SolverConfig,
    StepSize,
};
use demix::transforms::{Basis, BasisKind, ConstituentVector, Dictionary};
use rand::Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

type Check = fn() -> Verdict;

const CRITERIA: [(u32, &str, Check); 10] = [
    (1, "loss gradient matches central differences", gradient_vs_fd),
    (2, "truth is a stationary point and a DHT fixed point", truth_is_fixed_point),
    (3, "hard threshold is the best k-term approximation", hard_threshold_exhaustive),
    (4, "sign link constants", sign_link_constants),
    (5, "OneShot with sign link improves with m", oneshot_sign_sweep),
    (6, "DHT converges linearly on noiseless data", dht_linear_convergence),
    (7, "DHT error floor scales with noise and measurements", noise_floor_scaling),
    (8, "phase grid ordering DHT >= DST >= OneShot >= NlcdLASSO", grid_ordering),
    (9, "transform and operator algebra against dense oracles", operator_algebra),
    (10, "phase CSV is byte-identical across runs", phase_determinism),
];

fn main() {
    let wanted: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for (id, name, check) in CRITERIA {
        if !wanted.is_empty() && !wanted.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let v = check();
        let secs = start.elapsed().as_secs_f64();
        let status = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {id:2} {status}: {name} | {} | {secs:.1}s", v.detail);
        if !v.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

fn gaussian_vec(len: usize, seed: u64) -> Vec<f64> {
    let mut r = rng_from_seed(seed);
    (0..len).map(|_| standard_normal(&mut r)).collect()
}

fn diff_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Noisy problem with a random sparse truth, for checks that only need a
/// generic instance.
fn random_problem(n: usize, m: usize, s: usize, link: LinkKind, bases: (BasisKind, BasisKind), seed: u64) -> DemixProblem {
    let dict = Dictionary::from_kinds(bases.0, bases.1, n).unwrap();
    let mut t = vec![0.0; 2 * n];
    let mut r = rng_from_seed(derive_seed(seed, &[1]));
    for _ in 0..2 * s {
        t[r.random_range(0..2 * n)] = if r.random::<bool>() { 1.0 } else { -1.0 };
    }
    let x = dict.apply(&t).unwrap();
    let op = MeasurementOperator::sample(EnsembleKind::Gaussian, m, n, derive_seed(seed, &[2])).unwrap();
    let link = Link::new(link);
    let y = observe(&op, &link, &x, NoiseSpec::gaussian(0.1).unwrap(), derive_seed(seed, &[3])).unwrap();
    DemixProblem::new(op, dict, link, y, s).unwrap()
}

fn gradient_vs_fd() -> Verdict {
    let start = Instant::now();
    let (n, m) = (256, 128);
    let links = [LinkKind::LinearSine, LinkKind::Logistic, LinkKind::ShiftedLogistic];
    let bases = [
        (BasisKind::Identity, BasisKind::Dct),
        (BasisKind::Haar, BasisKind::Dct),
        (BasisKind::Identity, BasisKind::Haar),
    ];
    let h = 1e-6;
    let mut worst = 0.0f64;
    for pair in 0..50u64 {
        let problem = random_problem(n, m, 4, links[pair as usize % 3], bases[(pair / 3) as usize % 3], 1000 + pair);
        // Dense iterate with ‖t‖ ≈ 2 so the links are exercised away from 0.
        let t: Vec<f64> = gaussian_vec(2 * n, 5000 + pair)
            .into_iter()
            .map(|v| v * 2.0 / (2.0 * n as f64).sqrt())
            .collect();
        let grad = problem.gradient(&t).unwrap();
        let mut probe = t.clone();
        let fd: Vec<f64> = (0..2 * n)
            .map(|j| {
                probe[j] = t[j] + h;
                let plus = problem.loss(&probe).unwrap();
                probe[j] = t[j] - h;
                let minus = problem.loss(&probe).unwrap();
                probe[j] = t[j];
                (plus - minus) / (2.0 * h)
            })
            .collect();
        worst = worst.max(diff_norm(&grad, &fd) / l2_norm(&grad));
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst < 1e-5 && secs < 10.0,
        format!("max rel err {worst:.2e} (< 1e-5) over 50 pairs, {secs:.1}s (< 10s)"),
    )
}

fn truth_is_fixed_point() -> Verdict {
    let (n, m, s) = (1024, 300, 5);
    let mut worst_grad = 0.0f64;
    let mut worst_move = 0.0f64;
    let mut max_iters = 0;
    for (k, link) in [LinkKind::LinearSine, LinkKind::Logistic, LinkKind::ShiftedLogistic]
        .into_iter()
        .enumerate()
    {
        for seed in 0..4u64 {
            let spec = TrialSpec {
                n,
                s,
                m,
                link,
                seed: 100 * k as u64 + seed,
                ..TrialSpec::default()
            };
            let (signal, problem) = build_instance(&spec).unwrap();
            let t_star = signal.t();
            worst_grad = worst_grad.max(l2_norm(&problem.gradient(&t_star).unwrap()));
            let config = SolverConfig {
                init: Init::Given(t_star.clone()),
                ..SolverConfig::default()
            };
            let r = dht(&problem, &config).unwrap();
            worst_move = worst_move.max(diff_norm(&r.t_hat(), &t_star));
            max_iters = max_iters.max(r.iterations);
        }
    }
    verdict(
        worst_grad < 1e-10 && worst_move < 1e-12 && max_iters == 1,
        format!(
            "max |grad F(t*)| {worst_grad:.1e} (< 1e-10), max DHT displacement {worst_move:.1e}, stopped after {max_iters} iteration(s)"
        ),
    )
}

/// Smallest discarded energy over every k-subset, with the set achieving it
/// (first in lexicographic-by-bitmask order).
fn best_k_term(v: &[f64], k: usize) -> (f64, u32) {
    let len = v.len();
    let total: f64 = v.iter().map(|x| x * x).sum();
    let mut best = (f64::INFINITY, 0u32);
    for mask in 0u32..(1 << len) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let kept: f64 = (0..len).filter(|&i| mask >> i & 1 == 1).map(|i| v[i] * v[i]).sum();
        let resid = total - kept;
        if resid < best.0 {
            best = (resid, mask);
        }
    }
    best
}

fn hard_threshold_exhaustive() -> Verdict {
    let mut r = rng_from_seed(7);
    let mut mismatches = 0;
    let mut cases = 0;
    for case in 0..1000 {
        let len = r.random_range(1..=12);
        // Half the vectors are small integers so ties occur and sums are exact.
        let v: Vec<f64> = if case % 2 == 0 {
            (0..len).map(|_| standard_normal(&mut r)).collect()
        } else {
            (0..len).map(|_| r.random_range(-3i32..=3) as f64).collect()
        };
        for k in 0..=len {
            cases += 1;
            let out = hard_threshold(&v, k);
            let kept: Vec<usize> = (0..len).filter(|&i| out[i] != 0.0).collect();
            let ok_entries = (0..len).all(|i| out[i] == 0.0 || out[i] == v[i]);
            let resid: f64 = (0..len).map(|i| (v[i] - out[i]).powi(2)).sum();
            let (best, mask) = best_k_term(&v, k);
            let same_energy = if case % 2 == 0 {
                // Continuous draws: the optimal set is unique, compare it.
                let mut sel = 0u32;
                kept.iter().for_each(|&i| sel |= 1 << i);
                sel == mask
            } else {
                resid == best
            };
            if !(ok_entries && kept.len() <= k && same_energy) {
                mismatches += 1;
            }
        }
    }
    verdict(
        mismatches == 0,
        format!("{mismatches} mismatches in {cases} (vector, k) cases"),
    )
}

fn sign_link_constants() -> Verdict {
    let target = (2.0 / PI).sqrt();
    let mut worst_mu = 0.0f64;
    let mut worst_eta = 0.0f64;
    for seed in 0..5 {
        let c = link_constants(&Link::new(LinkKind::Sign), 100_000, seed).unwrap();
        worst_mu = worst_mu.max((c.mu - target).abs());
        worst_eta = worst_eta.max((c.eta2 - 1.0).abs());
    }
    verdict(
        worst_mu < 0.02 && worst_eta < 0.01,
        format!("max |mu - sqrt(2/pi)| {worst_mu:.4} (< 0.02), max |eta^2 - 1| {worst_eta:.4} (< 0.01), 5 seeds"),
    )
}

fn oneshot_sign_sweep() -> Verdict {
    let start = Instant::now();
    let r = recipe("sign-sweep").unwrap();
    let means: Vec<f64> = r
        .m_values
        .iter()
        .map(|&m| {
            (0..r.trials)
                .map(|k| {
                    let spec = TrialSpec {
                        m,
                        seed: trial_seed(0, r.base.s, m, k),
                        ..r.base.clone()
                    };
                    run_trial(&spec).unwrap().cosine
                })
                .sum::<f64>()
                / r.trials as f64
        })
        .collect();
    let secs = start.elapsed().as_secs_f64();
    let increasing = means.windows(2).all(|w| w[1] > w[0]);
    let last = *means.last().unwrap();
    verdict(
        last >= 0.9 && increasing && secs < 120.0,
        format!(
            "mean cosine at m={:?}: {:.4?} (last >= 0.9, strictly increasing), {secs:.1}s (< 120s)",
            r.m_values, means
        ),
    )
}

fn dht_linear_convergence() -> Verdict {
    let burn_in = 3;
    let mut hits = 0;
    let mut worst_ratio = 0.0f64;
    let mut iters = Vec::new();
    for seed in 0..20u64 {
        let spec = TrialSpec {
            n: 4096,
            s: 10,
            m: 800,
            link: LinkKind::LinearSine,
            seed,
            ..TrialSpec::default()
        };
        let (signal, problem) = build_instance(&spec).unwrap();
        let t_star = signal.t();
        let scale = l2_norm(&t_star);
        let mut errors = Vec::new();
        let config = SolverConfig {
            max_iters: 500,
            step_size: StepSize::Auto,
            ..SolverConfig::default()
        };
        dht_observed(&problem, &config, |_, t| errors.push(diff_norm(t, &t_star) / scale)).unwrap();
        let reached = errors.iter().position(|&e| e < 1e-4);
        if let Some(k) = reached {
            hits += 1;
            iters.push(k);
            // Contraction is measured until the iterates reach 1e-4 relative
            // error; below that the stopping tolerance dominates.
            for w in errors[burn_in.min(k)..=k].windows(2) {
                worst_ratio = worst_ratio.max(w[1] / w[0]);
            }
        }
    }
    verdict(
        hits >= 18 && worst_ratio < 1.0,
        format!(
            "{hits}/20 seeds below 1e-4 within 500 iterations (iterations needed {iters:?}); max post-burn-in error ratio {worst_ratio:.3} (< 1)"
        ),
    )
}

fn mean_dht_error(m: usize, tau: f64, seeds: u64) -> f64 {
    (0..seeds)
        .map(|seed| {
            let spec = TrialSpec {
                n: 4096,
                s: 10,
                m,
                tau,
                link: LinkKind::LinearSine,
                seed: 900 + seed,
                ..TrialSpec::default()
            };
            run_trial(&spec).unwrap().l2_err.unwrap()
        })
        .sum::<f64>()
        / seeds as f64
}

fn noise_floor_scaling() -> Verdict {
    let seeds = 6;
    let taus = [0.05, 0.1, 0.2];
    let errs: Vec<f64> = taus.iter().map(|&tau| mean_dht_error(800, tau, seeds)).collect();
    // Least-squares line through the origin.
    let c = errs.iter().zip(&taus).map(|(e, t)| e * t).sum::<f64>() / taus.iter().map(|t| t * t).sum::<f64>();
    let ratios: Vec<f64> = errs.iter().zip(&taus).map(|(e, t)| e / (c * t)).collect();
    let linear = ratios.iter().all(|&r| (0.5..=2.0).contains(&r));
    let wide = mean_dht_error(3200, 0.1, seeds);
    let gain = errs[1] / wide;
    let gain_ok = (1.4..=2.8).contains(&gain);
    verdict(
        linear && gain_ok,
        format!(
            "errors at tau={taus:?}: [{}], ratio to fitted line {ratios:.2?} (in [0.5, 2]); m 800->3200 at tau=0.1 reduces error by {gain:.2} (in [1.4, 2.8])",
            errs.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn grid_ordering() -> Verdict {
    let r = recipe("grid-linsin").unwrap();
    let order = [Algorithm::Dht, Algorithm::Dst, Algorithm::OneShot, Algorithm::NlcdLasso];
    let cols: Vec<Vec<f64>> = order
        .iter()
        .map(|&algorithm| {
            let base = TrialSpec {
                algorithm,
                ..r.base.clone()
            };
            run_phase_grid(&r.s_values, &r.m_values, r.trials, &base, Execution::Parallel)
                .unwrap()
                .column_means()
        })
        .collect();
    let mut detail = Vec::new();
    let mut pass = true;
    for (k, pair) in cols.windows(2).enumerate() {
        let violated = pair[0].iter().zip(&pair[1]).filter(|(a, b)| a < b).count();
        pass &= violated <= 1;
        detail.push(format!("{} vs {}: {violated} violated", order[k].name(), order[k + 1].name()));
    }
    let fmt = |c: &Vec<f64>| c.iter().map(|v| format!("{v:.2}")).collect::<Vec<_>>().join(" ");
    for (a, c) in order.iter().zip(&cols) {
        detail.push(format!("{}=[{}]", a.name(), fmt(c)));
    }
    verdict(pass, detail.join("; "))
}

// Dense oracles built from the textbook definitions.

fn dct_oracle(n: usize) -> Vec<f64> {
    // Column k is the k-th orthonormal DCT-II atom, row-major n × n.
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let scale = if k == 0 { (1.0 / n as f64).sqrt() } else { (2.0 / n as f64).sqrt() };
            c[i * n + k] = scale * (PI * (2 * i + 1) as f64 * k as f64 / (2 * n) as f64).cos();
        }
    }
    c
}

fn haar_oracle(n: usize) -> Vec<f64> {
    // Column 0 is constant; the detail block starting at index h (h = 1, 2,
    // 4, ...) holds h wavelets of width n/h, positive on the left half.
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        c[i * n] = 1.0 / (n as f64).sqrt();
    }
    let mut h = 1;
    while h < n {
        let width = n / h;
        let amp = 1.0 / (width as f64).sqrt();
        for j in 0..h {
            for off in 0..width {
                let sign = if off < width / 2 { 1.0 } else { -1.0 };
                c[(j * width + off) * n + h + j] = sign * amp;
            }
        }
        h *= 2;
    }
    c
}

fn basis_oracle(kind: BasisKind, n: usize) -> Vec<f64> {
    match kind {
        BasisKind::Identity => (0..n * n).map(|k| if k / n == k % n { 1.0 } else { 0.0 }).collect(),
        BasisKind::Dct => dct_oracle(n),
        BasisKind::Haar => haar_oracle(n),
    }
}

fn matvec(a: &[f64], rows: usize, cols: usize, x: &[f64]) -> Vec<f64> {
    (0..rows).map(|i| (0..cols).map(|j| a[i * cols + j] * x[j]).sum()).collect()
}

fn matvec_t(a: &[f64], rows: usize, cols: usize, y: &[f64]) -> Vec<f64> {
    (0..cols).map(|j| (0..rows).map(|i| a[i * cols + j] * y[i]).sum()).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn operator_algebra() -> Verdict {
    let kinds = [BasisKind::Identity, BasisKind::Dct, BasisKind::Haar];
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    let mut note = |what: String, err: f64| {
        if err.is_nan() || err > 1e-10 {
            failures.push(format!("{what}: {err:.1e}"));
        }
        worst = worst.max(err);
    };
    for n in [2usize, 4, 8, 16, 32, 64] {
        let x = gaussian_vec(n, n as u64);
        for kind in kinds {
            let basis = Basis::new(kind, n).unwrap();
            let oracle = basis_oracle(kind, n);
            note(format!("{kind:?} apply n={n}"), max_abs_diff(&basis.apply(&x).unwrap(), &matvec(&oracle, n, n, &x)));
            note(format!("{kind:?} adjoint n={n}"), max_abs_diff(&basis.adjoint(&x).unwrap(), &matvec_t(&oracle, n, n, &x)));
            note(
                format!("{kind:?} round trip n={n}"),
                max_abs_diff(&basis.apply(&basis.adjoint(&x).unwrap()).unwrap(), &x),
            );
            // Orthonormal columns.
            let gram_err = (0..n)
                .flat_map(|a| (0..n).map(move |b| (a, b)))
                .map(|(a, b)| {
                    let g: f64 = (0..n).map(|i| oracle[i * n + a] * oracle[i * n + b]).sum();
                    (g - if a == b { 1.0 } else { 0.0 }).abs()
                })
                .fold(0.0f64, f64::max);
            note(format!("{kind:?} oracle orthonormality n={n}"), gram_err);
        }
        for (pk, qk) in [(BasisKind::Identity, BasisKind::Dct), (BasisKind::Haar, BasisKind::Dct), (BasisKind::Identity, BasisKind::Haar)] {
            let dict = Dictionary::from_kinds(pk, qk, n).unwrap();
            let (p, q) = (basis_oracle(pk, n), basis_oracle(qk, n));
            let t = gaussian_vec(2 * n, 77 + n as u64);
            let expect: Vec<f64> = matvec(&p, n, n, &t[..n])
                .iter()
                .zip(matvec(&q, n, n, &t[n..]))
                .map(|(a, b)| a + b)
                .collect();
            note(format!("dictionary apply {pk:?}/{qk:?} n={n}"), max_abs_diff(&dict.apply(&t).unwrap(), &expect));
            let adj = dict.adjoint(&x).unwrap();
            let mut expect = matvec_t(&p, n, n, &x);
            expect.extend(matvec_t(&q, n, n, &x));
            note(format!("dictionary adjoint {pk:?}/{qk:?} n={n}"), max_abs_diff(&adj, &expect));
            // Γ Γᵀ = 2I.
            let back = dict.apply(&adj).unwrap();
            let twice: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
            note(format!("dictionary frame identity {pk:?}/{qk:?} n={n}"), max_abs_diff(&back, &twice));
            let ct = ConstituentVector::from_vec(t.clone()).unwrap();
            note(format!("constituent split n={n}"), max_abs_diff(ct.w(), &t[..n]) + max_abs_diff(ct.z(), &t[n..]));
        }
        for ensemble in [EnsembleKind::Gaussian, EnsembleKind::Rademacher, EnsembleKind::SubsampledFast] {
            let m = (n / 2).max(1);
            let op = MeasurementOperator::sample(ensemble, m, n, 31 + n as u64).unwrap();
            let dense = op.to_dense();
            let y = gaussian_vec(m, 5 + n as u64);
            note(format!("{ensemble:?} measure n={n}"), max_abs_diff(&op.measure(&x).unwrap(), &matvec(&dense, m, n, &x)));
            note(
                format!("{ensemble:?} adjoint n={n}"),
                max_abs_diff(&op.measure_adjoint(&y).unwrap(), &matvec_t(&dense, m, n, &y)),
            );
            let lhs = dot(&op.measure(&x).unwrap(), &y);
            let rhs = dot(&x, &op.measure_adjoint(&y).unwrap());
            note(format!("{ensemble:?} inner-product identity n={n}"), (lhs - rhs).abs() / lhs.abs().max(1.0));
            if ensemble == EnsembleKind::SubsampledFast {
                note(format!("subsampled structure n={n}"), subsampled_structure_error(&dense, m, n));
            }
        }
    }
    verdict(
        failures.is_empty(),
        if failures.is_empty() {
            format!("all checks within 1e-10 (worst {worst:.1e}) for n in 2..=64")
        } else {
            failures.join("; ")
        },
    )
}

/// A subsampled operator must equal √n · S · C · D for the DCT-II oracle `C`,
/// a sorted row selection `S` and a ±1 diagonal `D`. Returns the largest
/// entrywise mismatch for the best-fitting `S` and `D`.
///
/// DCT-II entries are never zero for power-of-two `n`, so guessing which DCT
/// row the first measurement row is fixes `D`; every other row must then be
/// an exact signed DCT row.
fn subsampled_structure_error(a: &[f64], m: usize, n: usize) -> f64 {
    let c = dct_oracle(n);
    let root_n = (n as f64).sqrt();
    // c[j * n + r] is atom r at sample j, i.e. entry (r, j) of the DCT matrix.
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|r| (0..n).map(|j| root_n * c[j * n + r]).collect())
        .collect();
    (0..n)
        .map(|r0| {
            let d: Vec<f64> = (0..n).map(|j| (a[j] / rows[r0][j]).signum()).collect();
            let mut chosen = Vec::with_capacity(m);
            let mut worst = 0.0f64;
            for i in 0..m {
                let row = &a[i * n..(i + 1) * n];
                let (err, r) = (0..n)
                    .map(|r| {
                        let e = (0..n).fold(0.0f64, |e, j| e.max((row[j] - d[j] * rows[r][j]).abs()));
                        (e, r)
                    })
                    .min_by(|x, y| x.0.total_cmp(&y.0))
                    .unwrap();
                worst = worst.max(err);
                chosen.push(r);
            }
            if chosen.windows(2).any(|w| w[0] >= w[1]) {
                f64::INFINITY
            } else {
                worst
            }
        })
        .fold(f64::INFINITY, f64::min)
}

fn phase_determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("grid.toml");
    std::fs::write(
        &config,
        r#"
n = 256
ensemble = "subfast"
link = "linsin"
algorithm = "dht"

[phase]
s_list = [2, 4, 8]
m_list = [40, 80, 160]
trials = 3
"#,
    )
    .unwrap();
    let run = |name: &str, extra: &[&str]| -> Result<Vec<u8>, String> {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_demix"))
            .arg("phase")
            .arg("--config")
            .arg(&config)
            .args(["--seed", "2024", "--out"])
            .arg(&out)
            .args(extra)
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("demix phase exited with {status}"));
        }
        std::fs::read(&out).map_err(|e| e.to_string())
    };
    let runs = (|| Ok::<_, String>((run("a.csv", &[])?, run("b.csv", &[])?, run("c.csv", &["--sequential"])?)))();
    let (a, b, c) = match runs {
        Ok(v) => v,
        Err(e) => return verdict(false, e),
    };
    // The same grid through the library must serialize to the same bytes too.
    let spec = TrialSpec {
        n: 256,
        ensemble: EnsembleKind::SubsampledFast,
        link: LinkKind::LinearSine,
        algorithm: Algorithm::Dht,
        seed: 2024,
        ..TrialSpec::default()
    };
    let grid = run_phase_grid(&[2, 4, 8], &[40, 80, 160], 3, &spec, Execution::Sequential).unwrap();
    let mut lib = Vec::new();
    write_grid_to(&grid, &mut lib).unwrap();
    let rows = String::from_utf8_lossy(&a).lines().count();
    verdict(
        a == b && a == c && a == lib && rows == 10,
        format!(
            "{} bytes, {rows} lines; repeat identical: {}, sequential identical: {}, library identical: {}",
            a.len(),
            a == b,
            a == c,
            a == lib
        ),
    )
}
