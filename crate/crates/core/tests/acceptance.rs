//! Acceptance run. Prints one PASS/FAIL line per criterion and exits nonzero
//! if any criterion fails.
//!
//! The learning criteria share one 1000 half-cycle experiment: the fraction
//! 1.0 points of the fraction trend and the 165 min point of the window
//! length comparison are the models trained for the learning criterion (same
//! data, same derived seeds).

use std::collections::BTreeMap;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::Instant;

use creep_surrogate::cli::{self, ExperimentConfig, FractionRow};
use creep_surrogate::creepsim::{self, JointGeometry, JointState};
use creep_surrogate::evalmetrics::MetricsReport;
use creep_surrogate::neuralnet::{
    backward, AdamState, Loss, LstmConfig, LstmNet, Mlp, ModelKind, Network,
    LSTM_PARAMETER_BUDGET,
};
use creep_surrogate::profilegen::{self, temperature_at, GRADIENT_RANGE_K_PER_MIN};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MASTER_SEED: u64 = 0;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// ---- gradients ----

fn batch_loss<N: Network>(net: &N, xs: &[Vec<f64>], ys: &[f64], loss: Loss) -> f64 {
    xs.iter()
        .zip(ys)
        .map(|(x, &y)| loss.eval(y, net.predict(x).unwrap()).unwrap().0)
        .sum()
}

fn worst_mismatch<N: Network>(net: &N, xs: &[Vec<f64>], ys: &[f64], loss: Loss) -> f64 {
    const H: f64 = 1e-5;
    let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
    let (_, analytic) = backward(net, &refs, ys, loss).unwrap();
    let mut worst: f64 = 0.0;
    for k in 0..net.params().len() {
        let mut plus = net.clone();
        plus.params_mut()[k] += H;
        let mut minus = net.clone();
        minus.params_mut()[k] -= H;
        let fd = (batch_loss(&plus, xs, ys, loss) - batch_loss(&minus, xs, ys, loss)) / (2.0 * H);
        let scale = fd.abs().max(analytic[k].abs()).max(1e-6);
        worst = worst.max((fd - analytic[k]).abs() / scale);
    }
    worst
}

fn offset_targets<N: Network>(net: &N, xs: &[Vec<f64>], rng: &mut ChaCha8Rng) -> Vec<f64> {
    xs.iter()
        .map(|x| {
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            net.predict(x).unwrap() + sign * (0.5 + rng.random_range(0.0..0.3))
        })
        .collect()
}

fn ac1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    let mlp = Mlp::init(5, &[4, 4], 0.0, 3);
    let xs: Vec<Vec<f64>> = (0..6)
        .map(|_| (0..5).map(|_| rng.random_range(-1.5..1.5)).collect())
        .collect();
    let ys = offset_targets(&mlp, &xs, &mut rng);
    for loss in [Loss::RelativeAbsolute, Loss::Squared] {
        worst = worst.max(worst_mismatch(&mlp, &xs, &ys, loss));
    }
    let mut lstm = LstmNet::init(1, 2, 2, 3);
    for p in lstm.params.iter_mut() {
        *p += rng.random_range(-0.3..0.3);
    }
    let xs: Vec<Vec<f64>> = (0..4)
        .map(|_| (0..6).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect();
    let ys = offset_targets(&lstm, &xs, &mut rng);
    for loss in [Loss::RelativeAbsolute, Loss::Squared] {
        worst = worst.max(worst_mismatch(&lstm, &xs, &ys, loss));
    }
    check(worst < 1e-4, format!("worst relative mismatch {worst:.2e} (< 1e-4)"))
}

// ---- adam ----

fn ac2() -> Outcome {
    let (b1, b2, eps, lr) = (0.9f64, 0.999f64, 1e-8, 0.001);
    let (mut m, mut v, mut p) = (0.0f64, 0.0f64, 0.5f64);
    let mut state = AdamState::new(1);
    let mut params = [0.5];
    let mut worst: f64 = 0.0;
    for t in 1..=3 {
        m = b1 * m + (1.0 - b1);
        v = b2 * v + (1.0 - b2);
        let m_hat = m / (1.0 - b1.powi(t));
        let v_hat = v / (1.0 - b2.powi(t));
        p -= lr * m_hat / (v_hat.sqrt() + eps);
        state.step(&mut params, &[1.0], lr);
        worst = worst.max((params[0] - p).abs());
    }
    check(worst <= 1e-12, format!("after 3 steps p = {:.15}, worst deviation {worst:.1e}", params[0]))
}

// ---- profile ----

fn default_run(dir: &Path) -> ExperimentConfig {
    ExperimentConfig {
        seed: MASTER_SEED,
        out_dir: dir.to_path_buf(),
        ..ExperimentConfig::default()
    }
}

fn learning_run(dir: &Path) -> ExperimentConfig {
    let mut cfg = default_run(dir);
    cfg.profile.n_half_cycles = 1000;
    cfg
}

fn ac3(cfg: &ExperimentConfig) -> Outcome {
    let profile = cli::cmd_generate(cfg).map_err(|e| e.to_string())?;
    let cycles = &profile.cycles;
    let (t_lo, t_hi) = profilegen::TARGET_RANGE_C;
    let (g_lo, g_hi) = GRADIENT_RANGE_K_PER_MIN;
    let (d_lo, d_hi) = profilegen::DWELL_RANGE_MIN;
    let in_ranges = cycles.iter().all(|c| {
        (t_lo..=t_hi).contains(&c.t_target_c)
            && (g_lo..=g_hi).contains(&c.t_dot_max)
            && c.delta_t_k.abs() <= profilegen::MAX_STEP_K
            && (d_lo..=d_hi).contains(&c.dwell_min)
    });
    let mut residual_ok = true;
    for c in cycles.iter().filter(|c| !c.dwell_clamped()) {
        let end = temperature_at(c, c.dwell_min).map_err(|e| e.to_string())?;
        let allowed = profilegen::RESIDUAL_FRACTION * c.t_target_c.abs();
        residual_ok &= (end - c.t_target_c).abs() <= allowed * (1.0 + 1e-9) + 1e-12;
    }
    let n = cycles.len() as f64;
    let t_mean = cycles.iter().map(|c| c.t_target_c).sum::<f64>() / n;
    let g_mean = cycles.iter().map(|c| c.t_dot_max).sum::<f64>() / n;
    let hours = profile.trace.total_duration_h();
    check(
        cycles.len() == 10_000
            && in_ranges
            && residual_ok
            && (t_mean - 25.0).abs() <= 5.0
            && (g_mean - 7.5).abs() <= 1.0
            && (2000.0..=3500.0).contains(&hours),
        format!(
            "n {}, ranges {in_ranges}, residual {residual_ok}, mean T {t_mean:.2} C, \
             mean gradient {g_mean:.3} K/min, duration {hours:.0} h",
            cycles.len()
        ),
    )
}

// ---- creep oracle ----

fn ac4(cfg: &ExperimentConfig) -> Outcome {
    let records = cli::cmd_simulate(cfg).map_err(|e| e.to_string())?;
    let profile = profilegen::generate_profile(&cfg.profile_spec()).map_err(|e| e.to_string())?;

    let neutral = JointGeometry {
        cte_board_ppm_per_k: cfg.geometry.cte_component_ppm_per_k,
        ..cfg.geometry.clone()
    };
    let head = 1000;
    let trace = profilegen::render_trace(&profile.cycles[..head], cfg.profile.sample_period_min);
    let zero = creepsim::simulate_profile(&trace, &profile.cycles[..head], &cfg.material, &neutral, cfg.dt_s)
        .map_err(|e| e.to_string())?;
    let zero_max = zero.iter().map(|r| r.increment).fold(0.0, f64::max);

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut picks: Vec<usize> = (0..20).map(|_| rng.random_range(0..head)).collect();
    picks.sort_unstable();
    let mut state = JointState::virgin(&cfg.geometry, profile.cycles[0].t_start_c);
    let mut worst_halving: f64 = 0.0;
    for (i, hc) in profile.cycles[..head].iter().enumerate() {
        let (next, coarse) =
            creepsim::integrate_half_cycle(&state, hc, &cfg.material, &cfg.geometry, cfg.dt_s)
                .map_err(|e| e.to_string())?;
        if picks.binary_search(&i).is_ok() {
            let (_, fine) = creepsim::integrate_half_cycle(
                &state,
                hc,
                &cfg.material,
                &cfg.geometry,
                cfg.dt_s / 2.0,
            )
            .map_err(|e| e.to_string())?;
            let a = creepsim::volume_average(&coarse, &cfg.geometry).unwrap();
            let b = creepsim::volume_average(&fine, &cfg.geometry).unwrap();
            worst_halving = worst_halving.max((a - b).abs() / b.abs().max(1e-300));
        }
        state = next;
    }

    let monotone = records.windows(2).all(|w| w[1].running_total >= w[0].running_total);
    let span = creepsim::decade_span(&records);
    check(
        zero_max < 1e-15 && worst_halving < 0.01 && monotone && span >= 6.0,
        format!(
            "zero-force max {zero_max:.1e}, halving worst {worst_halving:.1e}, \
             monotone {monotone}, span {span:.1} decades"
        ),
    )
}

// ---- closure ----

fn ac5(cfg: &ExperimentConfig) -> Outcome {
    let mut detail = Vec::new();
    let mut ok = true;
    for kind in [ModelKind::Mlp, ModelKind::Lstm] {
        let r = cli::cmd_evaluate(cfg, kind, 1.0, true).map_err(|e| e.to_string())?;
        ok &= r.f_rel_ave < 1e-9 && (r.r2 - 1.0).abs() <= 1e-12;
        detail.push(format!("{kind}: f_rel_ave {:.1e}, R2 {}", r.f_rel_ave, r.r2));
    }
    check(ok, detail.join("; "))
}

// ---- learning ----

fn ac6(cfg: &ExperimentConfig) -> Result<(Outcome, BTreeMap<ModelKind, MetricsReport>), String> {
    let mut reports = BTreeMap::new();
    let mut detail = Vec::new();
    let mut ok = true;
    for kind in [ModelKind::Mlp, ModelKind::Lstm] {
        let model = cli::cmd_train(cfg, kind, 1.0).map_err(|e| e.to_string())?;
        let r = cli::cmd_evaluate(cfg, kind, 1.0, false).map_err(|e| e.to_string())?;
        ok &= r.r2 >= 0.6 && r.f_rel_ave <= 0.15;
        detail.push(format!(
            "{kind}: R2 {:.3}, f_rel_ave {:.3} ({} epochs)",
            r.r2,
            r.f_rel_ave,
            model.history.len()
        ));
        reports.insert(kind, r);
    }
    Ok((check(ok, detail.join("; ") + " (need R2 >= 0.6, f_rel_ave <= 0.15)"), reports))
}

fn ac7(cfg: &ExperimentConfig, full: &BTreeMap<ModelKind, MetricsReport>) -> Outcome {
    let mut rows = Vec::new();
    for fraction in [0.125, 0.5, 1.0] {
        for kind in [ModelKind::Mlp, ModelKind::Lstm] {
            let r = if fraction == 1.0 {
                full[&kind].clone()
            } else {
                cli::cmd_train(cfg, kind, fraction).map_err(|e| e.to_string())?;
                cli::cmd_evaluate(cfg, kind, fraction, false).map_err(|e| e.to_string())?
            };
            rows.push(FractionRow {
                fraction,
                hours: 0.0,
                model: kind,
                f_rel_ave: r.f_rel_ave,
                r2: r.r2,
            });
        }
    }
    let mut ok = true;
    let mut detail = Vec::new();
    for kind in [ModelKind::Mlp, ModelKind::Lstm] {
        let errs: Vec<f64> = rows.iter().filter(|r| r.model == kind).map(|r| r.f_rel_ave).collect();
        let best = errs.iter().cloned().fold(f64::INFINITY, f64::min);
        let worst = errs.iter().cloned().fold(0.0, f64::max);
        let trend = cli::fraction_trends(&rows)
            .into_iter()
            .find(|t| t.model == kind)
            .expect("both models present");
        ok &= trend.largest_not_worse && best <= worst && trend.monotone_within_band;
        detail.push(format!(
            "{kind}: f_rel_ave {:.3}/{:.3}/{:.3}, monotone within band {}",
            errs[0], errs[1], errs[2], trend.monotone_within_band
        ));
    }
    check(ok, detail.join("; "))
}

fn ac8(cfg: &ExperimentConfig, full: &BTreeMap<ModelKind, MetricsReport>) -> Outcome {
    let short = cli::cmd_sweep_seqlen(cfg, Some(&[10.0])).map_err(|e| e.to_string())?;
    let long = full[&ModelKind::Lstm].f_rel_ave;
    check(
        cfg.lstm.sequence_length_min == 165.0 && long <= short[0].f_rel_ave,
        format!("f_rel_ave at 165 min {long:.3}, at 10 min {:.3}", short[0].f_rel_ave),
    )
}

// ---- determinism ----

fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let bytes = fs::read(&p).unwrap();
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), bytes);
            }
        }
    }
    out
}

fn ac9(profile_cfg: &ExperimentConfig, learn_cfg: &ExperimentConfig) -> Outcome {
    let before = [snapshot(&profile_cfg.out_dir), snapshot(&learn_cfg.out_dir)];
    for cfg in [profile_cfg, learn_cfg] {
        fs::remove_dir_all(&cfg.out_dir).map_err(|e| e.to_string())?;
    }
    let run = || -> Result<(), cli::CliError> {
        cli::cmd_generate(profile_cfg)?;
        cli::cmd_simulate(profile_cfg)?;
        cli::cmd_generate(learn_cfg)?;
        cli::cmd_simulate(learn_cfg)?;
        cli::cmd_dataset(learn_cfg)?;
        for kind in [ModelKind::Mlp, ModelKind::Lstm] {
            cli::cmd_evaluate(learn_cfg, kind, 1.0, true)?;
            cli::cmd_train(learn_cfg, kind, 1.0)?;
            cli::cmd_evaluate(learn_cfg, kind, 1.0, false)?;
        }
        Ok(())
    };
    run().map_err(|e| e.to_string())?;
    let after = [snapshot(&profile_cfg.out_dir), snapshot(&learn_cfg.out_dir)];
    let mut differing = Vec::new();
    let mut count = 0;
    for (b, a) in before.iter().zip(&after) {
        count += b.len();
        if b.keys().ne(a.keys()) {
            differing.push("file set".to_string());
        }
        for (path, bytes) in b {
            if a.get(path) != Some(bytes) {
                differing.push(path.display().to_string());
            }
        }
    }
    check(
        differing.is_empty(),
        format!("{count} artifacts compared, differing: {differing:?}"),
    )
}

fn ac10() -> Outcome {
    let cfg = LstmConfig::default();
    let net = LstmNet::init(1, cfg.cells_block1, cfg.cells_block2, 0);
    let n = net.params.len();
    check(
        n == cfg.n_params() && n < LSTM_PARAMETER_BUDGET && n < 500,
        format!("({}, {}) with skip: {n} trainable parameters", cfg.cells_block1, cfg.cells_block2),
    )
}

fn report(id: &str, title: &str, started: Instant, outcome: Outcome) -> bool {
    let secs = started.elapsed().as_secs_f64();
    let (tag, detail, ok) = match outcome {
        Ok(d) => ("PASS", d, true),
        Err(d) => ("FAIL", d, false),
    };
    println!("{tag} {id} {title} [{secs:.1} s]: {detail}");
    ok
}

fn guarded<T>(f: impl FnOnce() -> Result<T, String>) -> Result<T, String> {
    match panic::catch_unwind(AssertUnwindSafe(f)) {
        Ok(r) => r,
        Err(p) => Err(p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panicked".into())),
    }
}

fn main() {
    let tmp = tempfile::tempdir().expect("temporary directory");
    let profile_cfg = default_run(&tmp.path().join("profile"));
    let learn_cfg = learning_run(&tmp.path().join("learning"));
    let mut results = Vec::new();

    let t = Instant::now();
    results.push(report("AC1", "gradient oracle", t, guarded(ac1)));
    let t = Instant::now();
    results.push(report("AC2", "adam recursion", t, guarded(ac2)));
    let t = Instant::now();
    results.push(report("AC3", "profile generator", t, guarded(|| ac3(&profile_cfg))));
    let t = Instant::now();
    results.push(report("AC4", "creep oracle", t, guarded(|| ac4(&profile_cfg))));

    let t = Instant::now();
    let prepared = guarded(|| {
        cli::cmd_generate(&learn_cfg).map_err(|e| e.to_string())?;
        cli::cmd_simulate(&learn_cfg).map_err(|e| e.to_string())?;
        cli::cmd_dataset(&learn_cfg).map_err(|e| e.to_string())?;
        Ok(())
    });
    results.push(report(
        "AC5",
        "transform/metric closure",
        t,
        prepared.clone().and_then(|_| guarded(|| ac5(&learn_cfg))),
    ));

    let t = Instant::now();
    let learned = prepared.and_then(|_| guarded(|| ac6(&learn_cfg)));
    let full = match learned {
        Ok((outcome, reports)) => {
            results.push(report("AC6", "desk-scale learning", t, outcome));
            Some(reports)
        }
        Err(e) => {
            results.push(report("AC6", "desk-scale learning", t, Err(e)));
            None
        }
    };

    let t = Instant::now();
    results.push(report("AC9", "determinism", t, guarded(|| ac9(&profile_cfg, &learn_cfg))));

    let missing = || Err("learning run unavailable".to_string());
    let t = Instant::now();
    let out = match &full {
        Some(f) => guarded(|| ac7(&learn_cfg, f)),
        None => missing(),
    };
    results.push(report("AC7", "fraction trend", t, out));
    let t = Instant::now();
    let out = match &full {
        Some(f) => guarded(|| ac8(&learn_cfg, f)),
        None => missing(),
    };
    results.push(report("AC8", "sequence length", t, out));

    let t = Instant::now();
    results.push(report("AC10", "lstm parameter budget", t, guarded(ac10)));

    let failed = results.iter().filter(|ok| !**ok).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
