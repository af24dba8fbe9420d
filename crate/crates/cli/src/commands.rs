use rayon::prelude::*;

use cubic_metrology::analytic::{
    asymptotic_optimal, displacement_qfi, optimal_squeezing, population, qfi_rs, squeezed_vacuum_displacement_qfi,
    CubicParams, C2,
};
use cubic_metrology::fock::{cubic_state_projected_auto, mixed_qfi, LadderPoly, OperatorMatrix, QuantumState, Truncation};
use cubic_metrology::moments::{build_observable_set, xi2_inv, xi2_inv_numeric};
use cubic_metrology::noise::{lossy_cubic_state, noisy_xi2_inv, DetectionNoise, LossConfig};
use cubic_metrology::protocols::{
    ideal_envelope, protocol_scan, trisqueezed_state, Axis, Protocol, ScanGrid, SensitivityReport, TrisqueezeParams,
};
use cubic_metrology::verify::{run_criterion, CriterionReport, VerifyConfig, CRITERIA};
use cubic_metrology::{Error, C64};

use crate::args::{Common, ProtocolGrid, Range};
use crate::error::{CliError, CliResult};
use crate::output::Row;

const PURE_TOL: f64 = 1e-12;
/// The Lindblad cost grows like dim³, so lossy states use a looser tail;
/// at 1e-9 the lossless ξ⁻²₍₄₎ sits within 2e-4 of F/n.
const LOSS_TOL: f64 = 1e-9;

fn truncation(common: &Common, default_tol: f64, start_dim: usize) -> Truncation {
    Truncation { tol: common.tol.unwrap_or(default_tol), start_dim: start_dim.min(common.max_dim), max_dim: common.max_dim }
}

fn nonempty(name: &str, r: &Range) -> CliResult<()> {
    if r.points == 0 {
        return Err(CliError::Config(format!("--{name} has no points")));
    }
    Ok(())
}

fn positive(name: &str, v: f64) -> CliResult<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(CliError::Config(format!("--{name} must be positive, got {v}")));
    }
    Ok(())
}

fn per_n(f_q: f64, n: f64) -> Option<f64> {
    (n > 0.0).then(|| f_q / n)
}

fn xi_row(mut row: Row, xi: [Option<f64>; 4]) -> Row {
    const NAMES: [&str; 4] = ["xi2_inv_1", "xi2_inv_2", "xi2_inv_3", "xi2_inv_4"];
    for (name, v) in NAMES.into_iter().zip(xi) {
        row = row.opt(name, v);
    }
    row
}

fn closed_form(row: Row) -> Row {
    row.int("dim_used", 0).num("truncation_tail", 0.0)
}

pub fn fig1b(r: &Range, s: &Range) -> CliResult<Vec<Row>> {
    nonempty("r", r)?;
    nonempty("s", s)?;
    let grid: Vec<(f64, f64)> = r.linear().into_iter().flat_map(|r| s.linear().into_iter().map(move |s| (r, s))).collect();
    grid.par_iter()
        .map(|&(r, s)| {
            let n = population(r, s);
            let f = qfi_rs(r, s);
            let s_opt = if n > 0.0 {
                Some(optimal_squeezing(n).map_err(CliError::compute(format!("fig1b at r={r}, s={s}")))?.s_opt)
            } else {
                None
            };
            Ok(closed_form(
                Row::new()
                    .num("r", r)
                    .num("s", s)
                    .num("n", n)
                    .num("f_q", f)
                    .opt("f_q_over_n", per_n(f, n))
                    .opt("s_opt", s_opt),
            ))
        })
        .collect()
}

pub fn fig2(n: &Range) -> CliResult<Vec<Row>> {
    nonempty("n", n)?;
    positive("n", n.start)?;
    positive("n", n.end)?;
    let (s_inf, _) = asymptotic_optimal();
    n.logarithmic()
        .par_iter()
        .map(|&n| {
            let ctx = || format!("fig2 at n={n}");
            let opt = optimal_squeezing(n).map_err(CliError::compute(ctx()))?;
            let mut xi = [None; 4];
            for (k, slot) in xi.iter_mut().enumerate() {
                *slot = Some(xi2_inv(opt.r_opt_abs, opt.s_opt, k + 1).map_err(CliError::compute(ctx()))?);
            }
            let row = Row::new()
                .num("n", n)
                .num("s_opt", opt.s_opt)
                .num("r_opt", opt.r_opt_abs)
                .num("f_q", opt.f_q_max)
                .num("f_q_over_n", opt.f_q_max / n);
            Ok(closed_form(
                xi_row(row, xi)
                    .num("squeezed_f_q_over_n", 8.0 * (n + 1.0))
                    .num("asymptote_f_q_over_n", C2 * n)
                    .num("s_inf", s_inf),
            ))
        })
        .collect()
}

fn operating_point(n: f64) -> CliResult<CubicParams> {
    positive("n", n)?;
    let opt = optimal_squeezing(n).map_err(CliError::compute(format!("optimum at n={n}")))?;
    CubicParams::new(opt.r_opt_abs, opt.s_opt).map_err(CliError::compute("operating point"))
}

/// Smallest dimension in steps of 16 whose lossless evolution keeps the tail
/// below `trunc.tol`; loss only drains population, so it covers every γ.
/// Finer than doubling because the Lindblad cost grows like dim³.
fn loss_dim(params: &CubicParams, trunc: &Truncation) -> cubic_metrology::Result<usize> {
    let mut d = trunc.start_dim.max(2);
    loop {
        let tail = lossy_cubic_state(params, &LossConfig::with_gamma(0.0), d)?.tail_mass();
        if tail <= trunc.tol {
            return Ok(d);
        }
        if d >= trunc.max_dim {
            return Err(Error::Truncation { dim: d, tail, tol: trunc.tol });
        }
        d = (d + 16).min(trunc.max_dim);
    }
}

pub fn fig3b(gamma: &Range, n: f64, dim: Option<usize>, common: &Common) -> CliResult<Vec<Row>> {
    nonempty("gamma", gamma)?;
    let params = operating_point(n)?;
    let trunc = truncation(common, LOSS_TOL, 64);
    let dim = match dim {
        Some(d) => d,
        None => loss_dim(&params, &trunc).map_err(CliError::compute("fig3b lossless state"))?,
    };
    let n_op = OperatorMatrix::from_poly(&LadderPoly::number(), dim).map_err(CliError::compute("number operator"))?;
    let sets: Vec<_> = (1..=4)
        .map(|k| build_observable_set(k, dim))
        .collect::<Result<_, _>>()
        .map_err(CliError::compute("observable sets"))?;
    gamma
        .linear()
        .par_iter()
        .map(|&g| {
            let ctx = || format!("fig3b at gamma_t={g}");
            let rho = lossy_cubic_state(&params, &LossConfig::with_gamma(g), dim).map_err(CliError::compute(ctx()))?;
            let tail = rho.tail_mass();
            if tail > trunc.tol {
                return Err(CliError::Compute { context: ctx(), source: Error::Truncation { dim, tail, tol: trunc.tol } });
            }
            let n = rho.expect_poly(&LadderPoly::number()).re;
            let f = mixed_qfi(&rho, &n_op).map_err(CliError::compute(ctx()))?;
            let mut xi = [None; 4];
            for (slot, set) in xi.iter_mut().zip(&sets) {
                *slot = Some(xi2_inv_numeric(&rho, set).map_err(CliError::compute(ctx()))?);
            }
            let row = Row::new().num("gamma_t", g).num("n", n).num("f_q", f).opt("f_q_over_n", per_n(f, n));
            Ok(xi_row(row, xi).int("dim_used", dim).num("truncation_tail", tail))
        })
        .collect()
}

pub fn fig3c(sigma: &Range, n: f64, common: &Common) -> CliResult<Vec<Row>> {
    nonempty("sigma", sigma)?;
    let params = operating_point(n)?;
    let psi = cubic_state_projected_auto(params.r, params.s, &truncation(common, PURE_TOL, 40))
        .map_err(CliError::compute("fig3c state"))?;
    let f_over_n = qfi_rs(params.r, params.s) / params.n;
    sigma
        .linear()
        .par_iter()
        .map(|&sg| {
            let ctx = || format!("fig3c at sigma={sg}");
            let noise = DetectionNoise::new(sg).map_err(CliError::compute(ctx()))?;
            let mut xi = [None; 4];
            for (k, slot) in xi.iter_mut().enumerate() {
                *slot = Some(noisy_xi2_inv(&psi, k + 1, &noise).map_err(CliError::compute(ctx()))?);
            }
            let row = Row::new().num("sigma", sg).num("n", params.n).num("f_q_over_n", f_over_n);
            Ok(xi_row(row, xi).int("dim_used", psi.dim()).num("truncation_tail", psi.tail_mass()))
        })
        .collect()
}

fn grid_for(protocol: Protocol, over: &ProtocolGrid, common: &Common) -> CliResult<ScanGrid> {
    let mut g = ScanGrid::default_for(protocol);
    let quadratic_r = !matches!(protocol, Protocol::Kerr | Protocol::KerrPlain);
    if let Some(r) = over.r {
        nonempty("r", &r)?;
        g.r = if quadratic_r { Axis::quadratic(r.start, r.end, r.points) } else { Axis::new(r.start, r.end, r.points) };
    }
    if let Some(s) = over.s {
        nonempty("s", &s)?;
        g.s = Axis::new(s.start, s.end, s.points);
    }
    if matches!(protocol, Protocol::Kerr | Protocol::KerrPlain) {
        if let Some(d) = over.kerr_dim {
            g.dim = d;
        }
    }
    g.dim = g.dim.min(common.max_dim);
    if let Some(tol) = common.tol {
        g.tol = tol;
    }
    Ok(g)
}

fn scan(protocol: Protocol, grid: &ScanGrid) -> CliResult<SensitivityReport> {
    let rep = protocol_scan(protocol, grid).map_err(CliError::compute(format!("{} scan", protocol.label())))?;
    if rep.skipped > 0 {
        eprintln!("{}: {} grid points rejected by truncation or convergence checks", protocol.label(), rep.skipped);
    }
    Ok(rep)
}

fn envelope_rows(rep: &SensitivityReport, lambda: Option<Option<f64>>) -> CliResult<Vec<Row>> {
    rep.envelope
        .iter()
        .map(|b| {
            let ideal = ideal_envelope(b.n).map_err(CliError::compute(format!("ideal envelope at n={}", b.n)))?;
            let mut row = Row::new().text("protocol", rep.protocol.label());
            if let Some(l) = lambda {
                row = row.opt("lambda", l);
            }
            Ok(row
                .int("bin", b.index)
                .num("n_lo", b.n_lo)
                .num("n_hi", b.n_hi)
                .num("n", b.n)
                .num("f_q_over_n", b.f_over_n)
                .num("ideal_f_q_over_n", ideal)
                .num("squeezed_f_q_over_n", 8.0 * (b.n + 1.0))
                .int("dim_used", b.dim_used)
                .num("truncation_tail", b.truncation_tail))
        })
        .collect()
}

fn envelopes(protocols: &[Protocol], over: &ProtocolGrid, common: &Common) -> CliResult<Vec<Row>> {
    let grids: Vec<(Protocol, ScanGrid)> =
        protocols.iter().map(|&p| Ok((p, grid_for(p, over, common)?))).collect::<CliResult<_>>()?;
    let reports: Vec<SensitivityReport> = grids.par_iter().map(|(p, g)| scan(*p, g)).collect::<CliResult<_>>()?;
    let mut rows = Vec::new();
    for rep in &reports {
        rows.extend(envelope_rows(rep, None)?);
    }
    Ok(rows)
}

pub fn fig4(over: &ProtocolGrid, common: &Common) -> CliResult<Vec<Row>> {
    let mut protocols = vec![Protocol::SqueezedVacuum, Protocol::Ideal];
    protocols.extend((1..=5).map(|n_iter| Protocol::Rus { n_iter }));
    protocols.extend([Protocol::Kerr, Protocol::Trisqueeze]);
    envelopes(&protocols, over, common)
}

pub fn sm_fig_rus(n_iter: &[u32], over: &ProtocolGrid, common: &Common) -> CliResult<Vec<Row>> {
    if n_iter.is_empty() || n_iter.contains(&0) {
        return Err(CliError::Config("--n-iter needs positive iteration counts".into()));
    }
    let protocols: Vec<Protocol> = n_iter.iter().map(|&n_iter| Protocol::Rus { n_iter }).collect();
    envelopes(&protocols, over, common)
}

pub fn sm_fig_kerr(lambda: &Range, over: &ProtocolGrid, common: &Common) -> CliResult<Vec<Row>> {
    nonempty("lambda", lambda)?;
    let base = grid_for(Protocol::Kerr, over, common)?;
    let lambdas = lambda.linear();
    let reports: Vec<SensitivityReport> = lambdas
        .par_iter()
        .map(|&l| scan(Protocol::Kerr, &ScanGrid { lambda: Axis::single(l), ..base.clone() }))
        .collect::<CliResult<_>>()?;
    let mut rows = Vec::new();
    for (l, rep) in lambdas.iter().zip(&reports) {
        rows.extend(envelope_rows(rep, Some(Some(*l)))?);
    }
    let plain = scan(Protocol::KerrPlain, &grid_for(Protocol::KerrPlain, &ProtocolGrid::default(), common)?)?;
    rows.extend(envelope_rows(&plain, Some(None))?);
    Ok(rows)
}

pub fn sm_fig_trisqueeze(t: &Range, dim: usize, common: &Common) -> CliResult<Vec<Row>> {
    nonempty("t", t)?;
    let dim = dim.min(common.max_dim);
    t.linear()
        .par_iter()
        .map(|&t| {
            let ctx = || format!("sm_fig_trisqueeze at t={t}");
            let p = TrisqueezeParams::new(C64::new(t, 0.0), dim).map_err(CliError::compute(ctx()))?;
            let row = Row::new().num("t", t);
            match trisqueezed_state(&p) {
                Ok(psi) => {
                    let (m1, m2) = psi.number_moments();
                    let f = 4.0 * (m2 - m1 * m1).max(0.0);
                    Ok(row
                        .num("n", m1)
                        .num("f_q", f)
                        .opt("f_q_over_n", per_n(f, m1))
                        .flag("converged", true)
                        .int("dim_used", dim)
                        .num("truncation_tail", psi.tail_mass()))
                }
                Err(Error::NotConverged { .. }) => Ok(row
                    .opt("n", None)
                    .opt("f_q", None)
                    .opt("f_q_over_n", None)
                    .flag("converged", false)
                    .int("dim_used", dim)
                    .opt("truncation_tail", None)),
                Err(e) => Err(CliError::compute(ctx())(e)),
            }
        })
        .collect()
}

pub fn sm_fig_displacement(r: &Range, s: &Range) -> CliResult<Vec<Row>> {
    nonempty("r", r)?;
    nonempty("s", s)?;
    let grid: Vec<(f64, f64)> = r.linear().into_iter().flat_map(|r| s.linear().into_iter().map(move |s| (r, s))).collect();
    Ok(grid
        .par_iter()
        .map(|&(r, s)| {
            let n = population(r, s);
            let f = displacement_qfi(r, s);
            let g = squeezed_vacuum_displacement_qfi(n);
            closed_form(
                Row::new()
                    .num("r", r)
                    .num("s", s)
                    .num("n", n)
                    .num("f_disp", f)
                    .num("f_disp_squeezed", g)
                    .opt("ratio", (n > 0.0).then(|| f / g)),
            )
        })
        .collect())
}

pub fn point(r: f64, s: f64, common: &Common) -> CliResult<Vec<Row>> {
    let ctx = || format!("point at r={r}, s={s}");
    if !r.is_finite() || !(s >= 0.0 && s.is_finite()) {
        return Err(CliError::Config(format!("need finite r and s >= 0, got r={r}, s={s}")));
    }
    let n = population(r, s);
    let f = qfi_rs(r, s);
    let psi = cubic_state_projected_auto(r, s, &truncation(common, PURE_TOL, 40)).map_err(CliError::compute(ctx()))?;
    let (m1, m2) = psi.number_moments();
    let mut xi = [None; 4];
    let mut s_opt = None;
    if n > 0.0 {
        for (k, slot) in xi.iter_mut().enumerate() {
            *slot = Some(xi2_inv(r, s, k + 1).map_err(CliError::compute(ctx()))?);
        }
        s_opt = Some(optimal_squeezing(n).map_err(CliError::compute(ctx()))?.s_opt);
    }
    let row = Row::new()
        .num("r", r)
        .num("s", s)
        .num("n", n)
        .num("f_q", f)
        .num("f_q_fock", 4.0 * (m2 - m1 * m1))
        .opt("f_q_over_n", per_n(f, n));
    Ok(vec![xi_row(row, xi)
        .opt("s_opt", s_opt)
        .int("dim_used", psi.dim())
        .num("truncation_tail", psi.tail_mass())])
}

pub fn verify(only: &[String], common: &Common) -> CliResult<Vec<CriterionReport>> {
    let cfg = VerifyConfig { max_dim: common.max_dim, seed: common.seed, ..VerifyConfig::default() };
    let ids: Vec<String> =
        if only.is_empty() { CRITERIA.iter().map(|(id, _)| id.to_string()).collect() } else { only.to_vec() };
    ids.iter()
        .map(|id| run_criterion(id, &cfg).map_err(|e| CliError::Config(e.to_string())))
        .collect()
}

pub fn verify_rows(reports: &[CriterionReport]) -> Vec<Row> {
    let mut rows = Vec::new();
    for rep in reports {
        let base = |check: &str| Row::new().text("id", rep.id.clone()).text("title", rep.title.clone()).text("check", check);
        let tail = |row: Row| row.flag("criterion_pass", rep.pass).num("seconds", rep.seconds);
        if let Some(e) = &rep.error {
            rows.push(tail(
                base(&format!("error: {e}"))
                    .opt("measured", None)
                    .opt("target", None)
                    .opt("tolerance", None)
                    .text("comparison", "")
                    .flag("pass", false),
            ));
        }
        for c in &rep.checks {
            let comparison = serde_json::to_value(c.comparison).ok().and_then(|v| v.as_str().map(String::from));
            rows.push(tail(
                base(&c.name)
                    .num("measured", c.measured)
                    .num("target", c.target)
                    .num("tolerance", c.tolerance)
                    .text("comparison", comparison.unwrap_or_default())
                    .flag("pass", c.pass),
            ));
        }
    }
    rows
}
