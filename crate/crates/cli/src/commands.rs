use aqrm_core::block::{
    build_hamiltonian, catalog_biases, catalog_normalization, j_catalog, jsquared_polynomial, verify_jsquared,
    IdentityReport,
};
use aqrm_core::genfun::derive_symmetry;
use aqrm_core::scalar::{format_rational, rational_to_f64};
use aqrm_core::spectrum::{
    crossing_scan, discover_symmetry, fit_jsquared_poly, DiscoveryResult, FitResult, NumericParams, ScanConfig,
};
use aqrm_core::{Basis, BlockOp, ModelParams, Rational, Scalar};
use serde_json::json;

use crate::output::{exact, numeric, tag, write_artifact, write_json, CliResult, Failure};
use crate::{BasisArg, Format, OpKind, OutputArgs};

/// Gaps below this are reported as crossings.
const CROSSING_GAP: f64 = 1e-6;

/// Largest accepted relative residual of a `J²` fit.
const FIT_TOL: f64 = 1e-7;

fn json_only(out: &OutputArgs, command: &str) -> CliResult<()> {
    match out.format {
        Some(Format::Csv) => Err(Failure::Usage(format!("`{}` writes JSON only", command))),
        _ => Ok(()),
    }
}

fn params(eps: Rational, g: Option<Rational>, delta: Option<Rational>) -> ModelParams {
    let mut p = ModelParams::symbolic(eps);
    if let Some(g) = g {
        p.g = Scalar::constant(g);
    }
    if let Some(d) = delta {
        p.delta = Scalar::constant(d);
    }
    p
}

fn describe(x: &Option<Rational>) -> String {
    x.as_ref().map(format_rational).unwrap_or_else(|| "symbolic".into())
}

fn param_tag(eps: &str, g: Option<&str>, delta: Option<&str>) -> String {
    let mut s = format!("eps{}", tag(eps));
    if let Some(g) = g {
        s += &format!("_g{}", tag(g));
    }
    if let Some(d) = delta {
        s += &format!("_delta{}", tag(d));
    }
    s
}

pub fn verify(eps_s: &str, g_s: Option<&str>, delta_s: Option<&str>, out: &OutputArgs) -> CliResult<bool> {
    json_only(out, "verify")?;
    let eps = exact("eps", eps_s)?;
    let g = g_s.map(|s| exact("g", s)).transpose()?;
    let delta = delta_s.map(|s| exact("delta", s)).transpose()?;
    let p = params(eps.clone(), g.clone(), delta.clone());

    let j = j_catalog(&p, Basis::Original)?;
    let h = build_hamiltonian(&p);
    // Δ ↦ -Δ is only meaningful with Δ symbolic.
    let js = j_catalog(&ModelParams::symbolic(eps.clone()), Basis::Original)?;
    let reports = [
        IdentityReport { claim: "[J, H] = 0".into(), residual: j.commutator(&h) },
        IdentityReport { claim: "J† = J".into(), residual: j.adjoint().minus(&j) },
        IdentityReport {
            claim: "σx J(Δ) σx = -J(-Δ)".into(),
            residual: js.sigma_x_conjugate().plus(&js.negate_delta()),
        },
        verify_jsquared(&p)?,
    ];

    println!("ε = {}, g = {}, Δ = {}", eps, describe(&g), describe(&delta));
    for r in &reports {
        println!("  {}  {}", if r.holds() { "PASS" } else { "FAIL" }, r.claim);
    }
    let passed = reports.iter().all(IdentityReport::holds);
    println!("{} of {} identities hold", reports.iter().filter(|r| r.holds()).count(), reports.len());

    let report = json!({
        "epsilon": format_rational(&eps),
        "g": describe(&g),
        "delta": describe(&delta),
        "normalization": catalog_normalization(&eps),
        "identities": reports.iter().map(|r| {
            let mut v = r.to_json();
            v["holds"] = json!(r.holds());
            v
        }).collect::<Vec<_>>(),
        "passed": passed,
    });
    write_json(&out.out, &format!("verify_{}.json", param_tag(eps_s, g_s, delta_s)), &report)?;
    Ok(passed)
}

fn abs(r: &Rational) -> Rational {
    if *r < Rational::from_integer(0.into()) {
        -r.clone()
    } else {
        r.clone()
    }
}

/// `[-1/2, 0, 1/2]` → `"ε = 0, ε = ±1/2"`.
fn format_roots(roots: &[Rational]) -> String {
    let mut parts = Vec::new();
    let mut sorted: Vec<&Rational> = roots.iter().collect();
    sorted.sort_by(|a, b| abs(a).cmp(&abs(b)).then(b.cmp(a)));
    let mut used = vec![false; sorted.len()];
    for i in 0..sorted.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let r = sorted[i];
        let partner = (i + 1..sorted.len()).find(|&k| !used[k] && *sorted[k] == -r.clone());
        match partner {
            Some(k) if r != &Rational::from_integer(0.into()) => {
                used[k] = true;
                parts.push(format!("ε = ±{}", abs(r)));
            }
            _ => parts.push(format!("ε = {}", r)),
        }
    }
    parts.join(", ")
}

pub fn derive(m: usize, bound: Option<usize>, out: &OutputArgs) -> CliResult<bool> {
    json_only(out, "derive")?;
    let report = derive_symmetry(m, bound)?;
    println!("M = {}, u-degree bound {}", report.m, report.bound);
    for c in &report.epsilon_conditions {
        let kind = serde_json::to_value(c.kind).expect("serializable");
        println!("  {} ({})", c.statement(), kind.as_str().unwrap_or_default());
        println!("    {}", format_roots(&c.roots));
    }
    println!("  {} nontrivial solution(s), gauge dimension {}", report.solutions.len(), report.gauge_dimension);
    write_json(&out.out, &format!("derive_M{}.json", m), &report.to_json())?;
    Ok(true)
}

#[allow(clippy::too_many_arguments)]
pub fn scan(
    eps_s: &str,
    delta_s: &str,
    g_min_s: &str,
    g_max_s: &str,
    steps: usize,
    n: usize,
    levels: usize,
    out: &OutputArgs,
) -> CliResult<bool> {
    let mut cfg = ScanConfig::new(
        numeric("eps", eps_s)?,
        numeric("delta", delta_s)?,
        numeric("g-min", g_min_s)?,
        numeric("g-max", g_max_s)?,
    );
    cfg.steps = steps;
    cfg.n = n;
    cfg.levels = levels;
    let r = crossing_scan(&cfg)?;

    println!(
        "ε = {}, Δ = {}, g ∈ [{}, {}], {} points, N = {}",
        cfg.eps,
        cfg.delta,
        cfg.g_min,
        cfg.g_max,
        r.grid.len(),
        cfg.n
    );
    for p in &r.gaps {
        let flag = if p.refined_gap < CROSSING_GAP { "  crossing" } else { "" };
        println!(
            "  levels {}-{}: min gap {:.3e} at g = {:.10}{}",
            p.lower,
            p.lower + 1,
            p.refined_gap,
            p.refined_g,
            flag
        );
    }
    let crossings = r.crossings(CROSSING_GAP);
    if crossings.is_empty() {
        println!("no crossings detected");
    } else {
        println!("{} crossing pair(s) with gap < {:e}", crossings.len(), CROSSING_GAP);
    }
    for &(i, k) in &r.unconverged {
        println!("  unconverged: level {} at g = {}", k, r.grid[i]);
    }

    let stem = format!("scan_eps{}", tag(eps_s));
    match out.format.unwrap_or(Format::Csv) {
        Format::Csv => write_artifact(&out.out, &format!("{}.csv", stem), &r.to_csv()?)?,
        Format::Json => {
            write_json(&out.out, &format!("{}.json", stem), &serde_json::to_value(&r).expect("serializable"))?
        }
    };
    if !r.unconverged.is_empty() {
        println!("{} unconverged level(s)", r.unconverged.len());
    }
    Ok(r.unconverged.is_empty())
}

fn numeric_params(eps_s: &str, g_s: &str, delta_s: &str) -> CliResult<NumericParams> {
    Ok(NumericParams::new(numeric("g", g_s)?, numeric("delta", delta_s)?, numeric("eps", eps_s)?))
}

fn entry_name(row: usize, col: usize) -> String {
    format!("J{}{}", row + 1, col + 1)
}

fn print_fit(fit: &FitResult) -> bool {
    let alphas: Vec<String> = fit.alphas.iter().map(|a| format!("{:.10e}", a)).collect();
    println!("  J² ≈ Σ α_i H^i, α = [{}]", alphas.join(", "));
    println!(
        "  relative residual {:.2e}, condition {:.2e}{}",
        fit.relative_residual,
        fit.condition,
        if fit.ill_conditioned { " (ill-conditioned)" } else { "" }
    );
    let ok = fit.relative_residual < FIT_TOL;
    if !ok {
        println!("  fit residual exceeds {:e}", FIT_TOL);
    }
    ok
}

fn print_discovery(r: &DiscoveryResult) {
    println!(
        "ε = {}, g = {}, Δ = {}, D = {}, N = {}: nullspace dimension {}, gap ratio {:.2e}{}",
        r.params.eps,
        r.params.g,
        r.params.delta,
        r.degree,
        r.n,
        r.nullspace_dimension,
        r.gap_ratio,
        if r.ambiguous { " (ambiguous)" } else { "" }
    );
    if r.nullspace_dimension != 1 {
        return;
    }
    let (coeffs, what) = match r.catalog_normalized() {
        Some(c) => (c, "normalized against the catalog"),
        None => (r.vectors[0].clone(), "scaled to unit largest coefficient"),
    };
    println!("  operator coefficients of P (a†)^m a^n, {}:", what);
    for (l, c) in r.labels.iter().zip(&coeffs) {
        if c.abs() > 1e-12 {
            println!("    {} m={} n={}: {:+.12e}", entry_name(l.row, l.col), l.m, l.n, c);
        }
    }
    if let Some(e) = r.catalog_relative_error() {
        println!("  relative distance from the catalog operator {:.2e}", e);
    }
    match r.exact_verified {
        Some(true) => println!("  rounded rational coefficients commute exactly with H"),
        Some(false) => println!("  rounded rational coefficients do not commute exactly with H"),
        None => {}
    }
}

#[allow(clippy::too_many_arguments)]
pub fn discover(
    eps_s: &str,
    g_s: &str,
    delta_s: &str,
    d: u32,
    n: usize,
    m: Option<usize>,
    out: &OutputArgs,
) -> CliResult<bool> {
    json_only(out, "discover")?;
    let p = numeric_params(eps_s, g_s, delta_s)?;
    let r = discover_symmetry(&p, d, n)?;
    print_discovery(&r);
    write_json(
        &out.out,
        &format!("discover_eps{}_D{}.json", tag(eps_s), d),
        &serde_json::to_value(&r).expect("serializable"),
    )?;
    let mut ok = !r.ambiguous;
    if r.nullspace_dimension == 1 {
        let degree = m.unwrap_or(d as usize);
        // catalog scaling makes the coefficients comparable with the exact polynomial
        let mut normalized = r.clone();
        if let Some(v) = r.catalog_normalized() {
            normalized.vectors[0] = v;
        }
        let fit = fit_jsquared_poly(&p, &normalized.operator(0), n, degree)?;
        ok &= print_fit(&fit);
        write_json(
            &out.out,
            &format!("fit_eps{}_M{}.json", tag(eps_s), degree),
            &serde_json::to_value(&fit).expect("serializable"),
        )?;
    }
    Ok(ok)
}

/// The catalog bias equal to `eps`, if any.
fn catalog_bias(eps: f64) -> Option<Rational> {
    let r = Rational::from_float(eps)?;
    catalog_biases().into_iter().find(|b| *b == r)
}

#[allow(clippy::too_many_arguments)]
pub fn fit_jsq(
    eps_s: &str,
    g_s: &str,
    delta_s: &str,
    d: Option<u32>,
    n: usize,
    m: Option<usize>,
    out: &OutputArgs,
) -> CliResult<bool> {
    json_only(out, "fit-jsq")?;
    let p = numeric_params(eps_s, g_s, delta_s)?;
    let natural = (2.0 * p.eps.abs()).round() as u32;
    let (j, degree, predicted) = match catalog_bias(p.eps).filter(|_| d.is_none()) {
        Some(eps) => {
            let exact_p = ModelParams::symbolic(eps);
            let j: BlockOp<Scalar> = j_catalog(&exact_p, Basis::Original)?;
            let g = Rational::from_float(p.g).ok_or_else(|| Failure::Usage("g must be finite".into()))?;
            let delta = Rational::from_float(p.delta).ok_or_else(|| Failure::Usage("delta must be finite".into()))?;
            let predicted = jsquared_polynomial(&exact_p)?
                .iter()
                .map(|a| a.eval(&g, &delta).map(|v| rational_to_f64(&v)))
                .collect::<Result<Vec<f64>, _>>()?;
            println!("using the catalog operator at ε = {}", p.eps);
            (j, m.unwrap_or(natural as usize), Some(predicted))
        }
        None => {
            let d = d.unwrap_or(natural.max(1));
            let r = discover_symmetry(&p, d, n)?;
            print_discovery(&r);
            if r.nullspace_dimension != 1 || r.ambiguous {
                return Err(Failure::Checks(format!(
                    "no unique symmetry operator of degree {} at ε = {} (nullspace dimension {})",
                    d, p.eps, r.nullspace_dimension
                )));
            }
            (r.operator(0), m.unwrap_or(d as usize), None)
        }
    };
    let fit = fit_jsquared_poly(&p, &j, n, degree)?;
    let ok = print_fit(&fit);
    if let Some(pred) = &predicted {
        let s: Vec<String> = pred.iter().map(|a| format!("{:.10e}", a)).collect();
        println!("  exact polynomial α = [{}]", s.join(", "));
    }
    let mut value = serde_json::to_value(&fit).expect("serializable");
    value["params"] = serde_json::to_value(p).expect("serializable");
    if let Some(pred) = predicted {
        value["predicted_alphas"] = json!(pred);
    }
    write_json(&out.out, &format!("fit_eps{}_M{}.json", tag(eps_s), degree), &value)?;
    Ok(ok)
}

pub fn export_op(
    op: OpKind,
    eps_s: &str,
    g_s: Option<&str>,
    delta_s: Option<&str>,
    basis: BasisArg,
    out: &OutputArgs,
) -> CliResult<bool> {
    json_only(out, "export-op")?;
    let eps = exact("eps", eps_s)?;
    let g = g_s.map(|s| exact("g", s)).transpose()?;
    let delta = delta_s.map(|s| exact("delta", s)).transpose()?;
    let p = params(eps.clone(), g.clone(), delta.clone());
    let (basis, basis_name) = match basis {
        BasisArg::Original => (Basis::Original, "original"),
        BasisArg::Transformed => (Basis::Transformed, "transformed"),
    };
    let (x, name) = match op {
        OpKind::J => (j_catalog(&p, basis)?, "j"),
        OpKind::H => {
            let h = build_hamiltonian(&p);
            (if basis == Basis::Transformed { h.transform_basis() } else { h }, "h")
        }
    };
    println!(
        "{} at ε = {}, g = {}, Δ = {} ({} basis), degree {}",
        name.to_uppercase(),
        eps,
        describe(&g),
        describe(&delta),
        basis_name,
        x.degree()
    );
    let file = format!("{}_{}_{}.json", name, param_tag(eps_s, g_s, delta_s), basis_name);
    write_json(&out.out, &file, &serde_json::to_value(&x).expect("serializable"))?;
    Ok(true)
}
