//! One handler per subcommand. Each validates its flags, then computes,
//! then writes; nothing is written when any step fails.

use anyhow::{bail, Context, Result};
use phasequant::bgstates::{
    completeness_check, default_k_grid, default_rho_grid, k12_moments, k3_moments, kbound_scan as scan, log_grid,
    phase_expectations, ratio_gi, BgState, DEFAULT_TAIL_TOL,
};
use phasequant::export::{
    diagonal_identities_csv, matrix_csv, nfm_trials_csv, scan_csv, scan_summary, sector_table_csv, spectrum_csv,
    write_atomic, MatrixEnvelope,
};
use phasequant::fockreal::{compare_phase_ops, h1, h2, realization_residual, two_mode as build_two_mode, Realization};
use phasequant::nfm::{monte_carlo, NfmRunConfig, StateSpec};
use phasequant::phaseops::{
    build_phase_ops, diagonal_identities, ground_state_variance, k1_bound, phase_spectrum as spectrum,
};
use phasequant::repalg::{build_k1, build_k2, build_k3, build_kminus, build_kplus, casimir};
use phasequant::verify::{run_all, run_module, MODULES};
use phasequant::{Complex64, GroupTag, RepLabel};
use serde::Serialize;

use crate::output::{check_path, usage, Sink};
use crate::{
    CoherentArgs, CompletenessArgs, GroundVarianceArgs, GroupChoice, KGridArgs, KboundScanArgs, LabelArgs, NfmSimArgs,
    OmegaChoice, OperatorChoice, OscillatorArgs, OscillatorMode, PhaseSpectrumArgs, ReprArgs, StateKind, TwoModeArgs,
    VerifyArgs,
};

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(usage(format!("--{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

fn at_least(name: &str, v: usize, min: usize) -> Result<()> {
    if v < min {
        return Err(usage(format!("--{name} must be at least {min}, got {v}")));
    }
    Ok(())
}

fn increasing<T: PartialOrd + std::fmt::Debug>(name: &str, xs: &[T]) -> Result<()> {
    if xs.is_empty() {
        return Err(usage(format!("--{name} needs at least one value")));
    }
    if let Some(w) = xs.windows(2).find(|w| !(w[0] < w[1])) {
        return Err(usage(format!(
            "--{name} must be strictly increasing, got {:?} then {:?}",
            w[0], w[1]
        )));
    }
    Ok(())
}

fn label(a: &LabelArgs) -> Result<RepLabel> {
    positive("k", a.k)?;
    let omega = match a.omega {
        OmegaChoice::PlusOne => Complex64::new(1.0, 0.0),
        OmegaChoice::ImaginaryUnit => Complex64::new(0.0, 1.0),
    };
    let group = match a.group {
        GroupChoice::Universal => GroupTag::UniversalCover,
        GroupChoice::Su11 => GroupTag::Su11,
        GroupChoice::So12 => GroupTag::So12,
    };
    RepLabel::new(a.k, omega, group).map_err(|e| usage(e.to_string()))
}

/// `min, min+step, …` up to `max`; values are rounded to 12 decimals so
/// that `0.1 + 3·0.05` prints as `0.25`.
fn linear_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    positive("k-step", step)?;
    if !(max >= min) || !min.is_finite() || !max.is_finite() {
        return Err(usage(format!("need k-min <= k-max, got {min} and {max}")));
    }
    let n = ((max - min) / step + 1e-9).floor() as usize;
    if n > 100_000 {
        return Err(usage(format!("grid of {} points is too large", n + 1)));
    }
    Ok((0..=n)
        .map(|i| ((min + i as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

/// Explicit list, a min/max/step grid, or `default` when no flag is given.
fn k_grid(g: &KGridArgs, default: impl FnOnce() -> Vec<f64>) -> Result<Vec<f64>> {
    let ks = match (g.k.is_empty(), g.k_min, g.k_max, g.k_step) {
        (false, ..) => g.k.clone(),
        (true, None, None, None) => default(),
        (true, min, max, step) => {
            let d = default();
            linear_grid(
                min.unwrap_or(d[0]),
                max.unwrap_or(*d.last().expect("nonempty default")),
                step.unwrap_or(0.05),
            )?
        }
    };
    increasing("k", &ks)?;
    for &k in &ks {
        positive("k", k)?;
    }
    Ok(ks)
}

/// Hand-rolled CSV for tables of numbers; the header row comes first after
/// the comment lines.
fn table(comments: &[String], header: &[&str], rows: &[Vec<String>]) -> Vec<u8> {
    let mut out = String::new();
    for c in comments {
        out.push_str("# ");
        out.push_str(c);
        out.push('\n');
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out.into_bytes()
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn repr(a: ReprArgs, flags: String) -> Result<bool> {
    let l = label(&a.label)?;
    at_least("dim", a.dim, 1)?;
    let sink = Sink::new("repr", flags, a.out)?;
    let op = match a.operator {
        OperatorChoice::K3 => build_k3(&l, a.dim)?,
        OperatorChoice::Kplus => build_kplus(&l, a.dim)?,
        OperatorChoice::Kminus => build_kminus(&l, a.dim)?,
        OperatorChoice::K1 => build_k1(&l, a.dim)?,
        OperatorChoice::K2 => build_k2(&l, a.dim)?,
        OperatorChoice::Casimir => casimir(&l, a.dim)?,
        OperatorChoice::Cos => build_phase_ops(&l, a.dim)?.cos_op,
        OperatorChoice::Sin => build_phase_ops(&l, a.dim)?.sin_op,
    };
    let bytes = if sink.json() {
        sink.json_bytes(&MatrixEnvelope::from_operator(&op))?
    } else {
        matrix_csv(&op.entries, &sink.header())?
    };
    sink.write(&bytes)?;
    let nnz = op.entries.iter().filter(|v| v.re != 0.0 || v.im != 0.0).count();
    let hermitian = !matches!(a.operator, OperatorChoice::Kplus | OperatorChoice::Kminus);
    let defect = if hermitian {
        format!(", hermiticity defect {:e}", op.hermiticity_defect())
    } else {
        String::new()
    };
    sink.summary(&format!(
        "{}: k = {}, dim = {}, {nnz} nonzero entries{defect}",
        op.name,
        l.k(),
        a.dim
    ));
    Ok(true)
}

pub fn phase_spectrum(a: PhaseSpectrumArgs, flags: String) -> Result<bool> {
    let l = label(&a.label)?;
    at_least("dim", a.dim, if a.diagonal { 5 } else { 1 })?;
    if !a.diagonal && !l.has_real_omega() {
        return Err(usage("the spectrum needs --omega plus-one"));
    }
    let sink = Sink::new("phase-spectrum", flags, a.out)?;
    if a.diagonal {
        let d = diagonal_identities(&l, a.dim)?;
        let bytes = if sink.json() {
            sink.json_bytes(&d)?
        } else {
            diagonal_identities_csv(&d, &sink.header())?
        };
        sink.write(&bytes)?;
        sink.summary(&format!("diagonal identities: max interior residual {:e}", d.residual));
        return Ok(true);
    }
    let ev = spectrum(&build_phase_ops(&l, a.dim)?)?;
    let max_abs = ev.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    #[derive(Serialize)]
    struct Out<'a> {
        k: f64,
        dim: usize,
        max_abs: f64,
        eigenvalues: &'a [f64],
    }
    let bytes = if sink.json() {
        sink.json_bytes(&Out {
            k: l.k(),
            dim: a.dim,
            max_abs,
            eigenvalues: &ev,
        })?
    } else {
        spectrum_csv(&ev, &sink.header())?
    };
    sink.write(&bytes)?;
    sink.summary(&format!("max|λ| = {max_abs}"));
    Ok(true)
}

pub fn ground_variance(a: GroundVarianceArgs, flags: String) -> Result<bool> {
    let ks = k_grid(&a.grid, || vec![0.5, 1.0])?;
    at_least("dim", a.dim, 2)?;
    let sink = Sink::new("ground-variance", flags, a.out)?;
    #[derive(Serialize)]
    struct Row {
        k: f64,
        closed_form: f64,
        matrix: f64,
    }
    let rows = ks
        .iter()
        .map(|&k| {
            let pair = build_phase_ops(&RepLabel::universal(k)?, a.dim)?;
            let cos2 = pair.cos_op.product(&pair.cos_op)?;
            Ok(Row {
                k,
                closed_form: ground_state_variance(k),
                matrix: cos2.get(0, 0).re,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let k1 = k1_bound();
    let bytes = if sink.json() {
        #[derive(Serialize)]
        struct Out<'a> {
            k1_bound: f64,
            rows: &'a [Row],
        }
        sink.json_bytes(&Out {
            k1_bound: k1,
            rows: &rows,
        })?
    } else {
        let body: Vec<Vec<String>> = rows
            .iter()
            .map(|r| vec![num(r.k), num(r.closed_form), num(r.matrix)])
            .collect();
        table(&sink.header(), &["k", "closed_form", "matrix"], &body)
    };
    sink.write(&bytes)?;
    let gap = rows.iter().fold(0.0f64, |m, r| m.max((r.closed_form - r.matrix).abs()));
    sink.summary(&format!(
        "k1 = {k1}; {} values, max closed-vs-matrix gap {gap:e}",
        rows.len()
    ));
    Ok(true)
}

pub fn kbound_scan(a: KboundScanArgs, flags: String) -> Result<bool> {
    let ks = k_grid(&a.grid, default_k_grid)?;
    positive("rho-min", a.rho_min)?;
    positive("rho-max", a.rho_max)?;
    at_least("rho-points", a.rho_points, 1)?;
    if !(a.rho_max > a.rho_min) && a.rho_points > 1 {
        return Err(usage("--rho-max must exceed --rho-min"));
    }
    if let Some(p) = &a.verdicts {
        check_path(p)?;
    }
    let sink = Sink::new("kbound-scan", flags, a.out)?;
    let rho = if (a.rho_min, a.rho_max, a.rho_points) == (0.01, 100.0, 200) {
        default_rho_grid()
    } else {
        log_grid(a.rho_min, a.rho_max, a.rho_points)
    };
    let result = scan(&ks, &rho)?;
    let summary = scan_summary(&result);
    let verdicts = sink.json_bytes(&summary)?;
    let bytes = if sink.json() {
        verdicts.clone()
    } else {
        scan_csv(&result, &sink.header())?
    };
    if let Some(p) = &a.verdicts {
        write_atomic(p, &verdicts).with_context(|| format!("writing {}", p.display()))?;
    }
    sink.write(&bytes)?;
    let exceeds = summary
        .iter()
        .filter(|r| r.verdict == phasequant::Verdict::Exceeds)
        .count();
    let threshold = match result.threshold_bracket() {
        Some((lo, hi)) => format!("threshold between k = {lo} and k = {hi}"),
        None => "no threshold on this grid".into(),
    };
    sink.summary(&format!("{exceeds} of {} k values EXCEED; {threshold}", summary.len()));
    Ok(true)
}

pub fn coherent(a: CoherentArgs, flags: String) -> Result<bool> {
    positive("k", a.k)?;
    increasing("rho", &a.rho)?;
    if a.rho.iter().any(|&r| !(r >= 0.0) || !r.is_finite()) {
        return Err(usage("--rho values must be nonnegative and finite"));
    }
    if !a.phi.is_finite() {
        return Err(usage("--phi must be finite"));
    }
    let sink = Sink::new("coherent", flags, a.out)?;
    #[derive(Serialize)]
    struct Row {
        rho: f64,
        phi: f64,
        dim: usize,
        mean_k3: f64,
        var_k3: f64,
        mean_k1: f64,
        mean_k2: f64,
        var_k1: f64,
        var_k2: f64,
        cos_mean: f64,
        sin_mean: f64,
        ratio_gi: f64,
        uncertainty_excess: f64,
    }
    let rows = a
        .rho
        .iter()
        .map(|&rho| {
            let state = BgState::with_auto_dim(a.k, Complex64::from_polar(rho, a.phi), DEFAULT_TAIL_TOL)?;
            // the checked variants fail if closed form and sum disagree
            let m3 = k3_moments(&state)?;
            let m12 = k12_moments(&state)?;
            let ph = phase_expectations(&state)?;
            Ok(Row {
                rho,
                phi: a.phi,
                dim: state.dim(),
                mean_k3: m3.mean,
                var_k3: m3.variance,
                mean_k1: m12.mean_k1,
                mean_k2: m12.mean_k2,
                var_k1: m12.var_k1,
                var_k2: m12.var_k2,
                cos_mean: ph.cos_mean,
                sin_mean: ph.sin_mean,
                ratio_gi: ratio_gi(a.k, rho)?,
                uncertainty_excess: m12.uncertainty_product().sqrt() - 0.5 * m3.mean,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let bytes = if sink.json() {
        sink.json_bytes(&rows)?
    } else {
        let header = [
            "rho",
            "phi",
            "dim",
            "mean_k3",
            "var_k3",
            "mean_k1",
            "mean_k2",
            "var_k1",
            "var_k2",
            "cos_mean",
            "sin_mean",
            "ratio_gi",
            "uncertainty_excess",
        ];
        let body: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                vec![
                    num(r.rho),
                    num(r.phi),
                    r.dim.to_string(),
                    num(r.mean_k3),
                    num(r.var_k3),
                    num(r.mean_k1),
                    num(r.mean_k2),
                    num(r.var_k1),
                    num(r.var_k2),
                    num(r.cos_mean),
                    num(r.sin_mean),
                    num(r.ratio_gi),
                    num(r.uncertainty_excess),
                ]
            })
            .collect();
        table(&sink.header(), &header, &body)
    };
    sink.write(&bytes)?;
    let excess = rows.iter().fold(0.0f64, |m, r| m.max(r.uncertainty_excess.abs()));
    sink.summary(&format!(
        "{} states at k = {}; max |ΔK1ΔK2 − ½⟨K3⟩| = {excess:e}",
        rows.len(),
        a.k
    ));
    Ok(true)
}

pub fn completeness(a: CompletenessArgs, flags: String) -> Result<bool> {
    increasing("k", &a.k)?;
    increasing("n", &a.n)?;
    if a.k.iter().any(|&k| !(k >= 0.5)) {
        return Err(usage("completeness needs every --k >= 0.5"));
    }
    if a.n.iter().any(|&n| n > 20) {
        return Err(usage("completeness supports --n up to 20"));
    }
    positive("rho-max", a.rho_max)?;
    positive("tol", a.tol)?;
    let sink = Sink::new("completeness", flags, a.out)?;
    #[derive(Serialize)]
    struct Row {
        k: f64,
        n: usize,
        #[serde(flatten)]
        check: phasequant::bgstates::CompletenessCheck,
    }
    let mut rows = Vec::new();
    for &k in &a.k {
        for &n in &a.n {
            rows.push(Row {
                k,
                n,
                check: completeness_check(k, n, a.rho_max, a.tol)?,
            });
        }
    }
    let bytes = if sink.json() {
        sink.json_bytes(&rows)?
    } else {
        let body: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                vec![
                    num(r.k),
                    r.n.to_string(),
                    num(r.check.value),
                    num(r.check.quad_error),
                    num(r.check.moment),
                    num(r.check.moment_exact),
                ]
            })
            .collect();
        table(
            &sink.header(),
            &["k", "n", "value", "quad_error", "moment", "moment_exact"],
            &body,
        )
    };
    sink.write(&bytes)?;
    let worst = rows.iter().fold(0.0f64, |m, r| m.max((r.check.value - 1.0).abs()));
    sink.summary(&format!("{} number states; max |value − 1| = {worst:e}", rows.len()));
    Ok(true)
}

fn realization_name(r: Realization) -> &'static str {
    match r {
        Realization::HolsteinPrimakoff => "holstein-primakoff",
        Realization::Dirac => "dirac",
        Realization::SusskindGlogower => "susskind-glogower",
        Realization::SquaredBoson => "squared-boson",
        Realization::TwoMode => "two-mode",
    }
}

pub fn oscillator(a: OscillatorArgs, flags: String) -> Result<bool> {
    positive("k", a.k)?;
    match a.mode {
        OscillatorMode::Residuals => {
            let per = (a.dim as f64).sqrt().round() as usize;
            if per * per != a.dim {
                return Err(usage(format!(
                    "--dim must be a perfect square for the two-mode realization, got {}",
                    a.dim
                )));
            }
            if a.dim <= 2 * a.margin + 4 || per <= 2 * a.margin {
                return Err(usage(format!(
                    "--dim {} leaves no interior with --margin {}",
                    a.dim, a.margin
                )));
            }
        }
        OscillatorMode::HCurve => {
            positive("r-max", a.r_max)?;
            at_least("r-points", a.r_points, 2)?;
        }
        OscillatorMode::Compare => at_least("dim", a.dim, 4)?,
    }
    let sink = Sink::new("oscillator", flags, a.out)?;
    match a.mode {
        OscillatorMode::Residuals => {
            #[derive(Serialize)]
            struct Row {
                realization: &'static str,
                absolute: f64,
                scaled: f64,
            }
            let rows = Realization::ALL
                .iter()
                .map(|&r| {
                    let res = realization_residual(r, a.k, a.dim, a.margin)?;
                    Ok(Row {
                        realization: realization_name(r),
                        absolute: res.absolute,
                        scaled: res.scaled,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let bytes = if sink.json() {
                sink.json_bytes(&rows)?
            } else {
                let body: Vec<Vec<String>> = rows
                    .iter()
                    .map(|r| vec![r.realization.to_string(), num(r.absolute), num(r.scaled)])
                    .collect();
                table(&sink.header(), &["realization", "absolute", "scaled"], &body)
            };
            sink.write(&bytes)?;
            let worst = rows.iter().fold(0.0f64, |m, r| m.max(r.absolute));
            let worst_scaled = rows.iter().fold(0.0f64, |m, r| m.max(r.scaled));
            sink.summary(&format!("max interior residual {worst:e} (scaled {worst_scaled:e})"));
        }
        OscillatorMode::HCurve => {
            let rows = (0..a.r_points)
                .map(|i| {
                    let r = a.r_max * i as f64 / (a.r_points - 1) as f64;
                    Ok([r, h1(a.k, r)?, h2(a.k, r)?])
                })
                .collect::<Result<Vec<_>>>()?;
            let bytes = if sink.json() {
                #[derive(Serialize)]
                struct Point {
                    r: f64,
                    h1: f64,
                    h2: f64,
                }
                let pts: Vec<Point> = rows.iter().map(|&[r, h1, h2]| Point { r, h1, h2 }).collect();
                sink.json_bytes(&pts)?
            } else {
                let body: Vec<Vec<String>> = rows.iter().map(|row| row.iter().map(|&v| num(v)).collect()).collect();
                table(&sink.header(), &["r", "h1", "h2"], &body)
            };
            sink.write(&bytes)?;
            let top = rows.iter().fold(f64::NEG_INFINITY, |m, r| m.max(r[2]));
            sink.summary(&format!("max h2 = {top}"));
        }
        OscillatorMode::Compare => {
            let c = compare_phase_ops(a.k, a.dim)?;
            let bytes = if sink.json() {
                sink.json_bytes(&c)?
            } else {
                let body: Vec<Vec<String>> = (0..c.sum_squares_hp.len())
                    .map(|n| vec![n.to_string(), num(c.sum_squares_hp[n]), num(c.sum_squares_sg[n])])
                    .collect();
                let mut comments = sink.header();
                comments.push(format!(
                    "max|cos_hp − cos_sg| = {}, max|sin_hp − sin_sg| = {}, max|cos_dirac − cos_sg| = {}",
                    c.cos_hp_minus_sg, c.sin_hp_minus_sg, c.cos_dirac_minus_sg
                ));
                table(&comments, &["n", "sum_squares_hp", "sum_squares_sg"], &body)
            };
            sink.write(&bytes)?;
            sink.summary(&format!(
                "max|cos_hp − cos_sg| = {:e}, Dirac hermiticity defect {:e}",
                c.cos_hp_minus_sg, c.dirac_hermiticity_defect
            ));
        }
    }
    Ok(true)
}

pub fn two_mode(a: TwoModeArgs, flags: String) -> Result<bool> {
    at_least("dim-per-mode", a.dim_per_mode, 2)?;
    if a.dim_per_mode > 64 {
        return Err(usage("--dim-per-mode is capped at 64 (dense tensor products)"));
    }
    let sink = Sink::new("two-mode", flags, a.out)?;
    let tm = build_two_mode(a.dim_per_mode)?;
    let bytes = if sink.json() {
        #[derive(Serialize)]
        struct Out<'a> {
            dim_per_mode: usize,
            sector_mismatch: f64,
            sectors: &'a [phasequant::TwoModeBasisIndex],
        }
        sink.json_bytes(&Out {
            dim_per_mode: tm.dim_per_mode,
            sector_mismatch: tm.sector_mismatch,
            sectors: &tm.sector_table,
        })?
    } else {
        sector_table_csv(&tm.sector_table, &sink.header())?
    };
    sink.write(&bytes)?;
    sink.summary(&format!(
        "{} sectors, k = ½ + |n1−n2|/2; restricted mismatch {:e}",
        2 * a.dim_per_mode - 1,
        tm.sector_mismatch
    ));
    Ok(true)
}

fn nfm_config(a: &NfmSimArgs) -> Result<NfmRunConfig> {
    if let Some(p) = &a.config {
        let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        return serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", p.display())));
    }
    let Some(kind) = a.state else {
        return Err(usage("nfm-sim needs --config or --state"));
    };
    let k = a.k.ok_or_else(|| usage("--k is required"))?;
    let state = match kind {
        StateKind::Number => {
            if a.rho.is_some() || a.phi.is_some() {
                return Err(usage("--rho and --phi apply to --state bg"));
            }
            StateSpec::Number {
                k,
                n: a.n.ok_or_else(|| usage("--n is required for --state number"))?,
            }
        }
        StateKind::Bg => {
            if a.n.is_some() {
                return Err(usage("--n applies to --state number"));
            }
            StateSpec::Bg {
                k,
                rho: a.rho.ok_or_else(|| usage("--rho is required for --state bg"))?,
                phi: a.phi.unwrap_or(0.0),
            }
        }
    };
    Ok(NfmRunConfig {
        state,
        noise: a.noise,
        trials: a.trials.unwrap_or(1),
        seed: a.seed.unwrap_or(0),
    })
}

pub fn nfm_sim(a: NfmSimArgs, flags: String) -> Result<bool> {
    let cfg = nfm_config(&a)?;
    positive("k", cfg.state.k())?;
    match cfg.state {
        StateSpec::Bg { rho, phi, .. } => {
            if !(rho >= 0.0) || !rho.is_finite() || !phi.is_finite() {
                return Err(usage("--rho must be nonnegative and --phi finite"));
            }
        }
        StateSpec::Number { .. } => {}
    }
    if let Some(s) = cfg.noise {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(usage(format!("--noise must be nonnegative, got {s}")));
        }
    }
    at_least("trials", cfg.trials, 1)?;
    let sink = Sink::new("nfm-sim", flags, a.out)?;
    let summary = monte_carlo(&cfg)?;
    let bytes = if sink.json() {
        sink.json_bytes(&summary)?
    } else {
        nfm_trials_csv(&summary, &sink.header())?
    };
    sink.write(&bytes)?;
    sink.summary(&format!(
        "{} trials; spread of K1 error {:e}, K2 error {:e}, ρ error {}, φ error {}",
        summary.trials.len(),
        summary.k1_spread,
        summary.k2_spread,
        opt(summary.rho_spread),
        opt(summary.phi_spread)
    ));
    Ok(true)
}

pub fn verify_all(a: VerifyArgs) -> Result<bool> {
    if let Some(m) = &a.module {
        if !MODULES.contains(&m.as_str()) {
            return Err(usage(format!(
                "unknown module {m:?}; expected one of {}",
                MODULES.join(", ")
            )));
        }
    }
    if let Some(p) = &a.output {
        check_path(p)?;
    }
    let outcomes = match &a.module {
        Some(m) => run_module(m),
        None => run_all(),
    };
    if outcomes.is_empty() {
        bail!("no checks ran");
    }
    for c in &outcomes {
        println!(
            "{} {}: {} (value {:e}, bound {:e}; {:.2}s)",
            if c.passed { "PASS" } else { "FAIL" },
            c.module,
            c.name,
            c.value,
            c.bound,
            c.seconds
        );
    }
    let mut all = true;
    for m in MODULES {
        let mine: Vec<_> = outcomes.iter().filter(|c| c.module == m).collect();
        if mine.is_empty() {
            continue;
        }
        let ok = mine.iter().filter(|c| c.passed).count();
        all &= ok == mine.len();
        println!(
            "{} module {m}: {ok}/{} checks",
            if ok == mine.len() { "PASS" } else { "FAIL" },
            mine.len()
        );
    }
    if let Some(p) = &a.output {
        // timings are left out so the file is reproducible
        #[derive(Serialize)]
        struct Row<'a> {
            module: &'a str,
            name: &'a str,
            value: f64,
            bound: f64,
            passed: bool,
            detail: &'a str,
        }
        let rows: Vec<Row> = outcomes
            .iter()
            .map(|c| Row {
                module: c.module,
                name: c.name,
                value: c.value,
                bound: c.bound,
                passed: c.passed,
                detail: &c.detail,
            })
            .collect();
        write_atomic(p, &phasequant::export::json_bytes(&rows)?)?;
    }
    Ok(all)
}
