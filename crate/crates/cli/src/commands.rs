use std::fmt::Write as _;
use std::path::PathBuf;

use serde_json::{json, Value};
use sip_core::ansatz::{
    construct_case, extend_constant_shift, extend_second_solution, ConstructedSuperpotential, SeedBranch,
    SeedSolution,
};
use sip_core::bessel::{spherical_bessel_derivatives, spherical_bessel_oracle};
use sip_core::catalog::list_families;
use sip_core::multidim::{
    laplace_seed, parse_legendre_terms, partner_fields, prepotential_riccati_residual, seed_manifest,
    verify_3d_shape_invariance, write_partner_csv, Grid2D, Region,
};
use sip_core::oracle::{compare_spectra, family_oracle, CompareMode};
use sip_core::radial::{bessel_recurrence_residual, centrifugal, write_recurrence_csv, Scheme};
use sip_core::spectral::{
    algebraic_spectrum, format_number as num, ladder_wavefunctions, write_spectrum_csv, write_wavefunctions_csv,
};
use sip_core::verify::{verify_family_on, verify_shape_invariance};
use sip_core::{Family, ParamSet, UniformGrid, VerificationReport};

use crate::args::{
    Command, ConstructArgs, ListArgs, ParamArgs, RadialArgs, ScanArgs, SpectrumArgs, ThreeDArgs, VerifyArgs,
};
use crate::output::{CliError, CliResult, OutputDir, Report, EXIT_FAIL, EXIT_PASS, EXIT_TRUNCATED};

const RADII: [f64; 5] = [0.5, 1.0, 2.0, 5.0, 10.0];

/// Runs one command; `out_root` receives data files for the commands that
/// write any.
pub fn run(command: &Command, out_root: &PathBuf) -> CliResult<Report> {
    let dir = |name: String| OutputDir::new(out_root.join(name));
    let inputs = serde_json::to_value(command).map_err(|e| CliError::Failure(e.to_string()))?;
    match command {
        Command::List(a) => list(a),
        Command::Verify(a) => verify(a),
        Command::Spectrum(a) => spectrum(a, dir(format!("spectrum-{}", a.family)), inputs),
        Command::Construct(a) => construct(a, dir("construct".into()), inputs),
        Command::ThreeD(a) => three_d(a, dir("3d".into()), inputs),
        Command::Radial(a) => radial(a, dir(format!("radial-ell{}", a.ell)), inputs),
        Command::Scan(a) => scan(a),
    }
}

fn passed(ok: bool) -> i32 {
    if ok {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

fn status(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn family_arg(name: &str) -> CliResult<Family> {
    name.parse::<Family>().map_err(CliError::from)
}

/// Reference parameters overridden by the given flags; flags that the
/// family does not use are rejected.
fn family_params(family: Family, args: &ParamArgs) -> CliResult<ParamSet> {
    let mut p = family.reference_params();
    for (name, value) in args.given() {
        if !family.parameter_names().contains(&name) {
            return Err(CliError::Usage(format!(
                "{family} takes {}, not --{name}",
                family.parameter_names().join(", ")
            )));
        }
        p.set(name, value);
    }
    family.validate(&p)?;
    Ok(p)
}

fn params_text(p: &ParamSet) -> String {
    p.iter().map(|(k, v)| format!("{k}={}", num(v))).collect::<Vec<_>>().join(" ")
}

fn report_text(out: &mut String, label: &str, r: &VerificationReport) {
    let _ = writeln!(out, "{label}: {}", status(r.passed));
    let _ = writeln!(out, "  estimated constant: {}", num(r.estimated_constant));
    let _ = writeln!(out, "  max deviation: {}", num(r.max_residual));
    let _ = writeln!(out, "  tolerance: {}", num(r.tolerance));
    if !r.pole_exclusions.is_empty() {
        let poles: Vec<String> = r.pole_exclusions.iter().map(|p| num(*p)).collect();
        let _ = writeln!(out, "  poles excluded: {}", poles.join(", "));
    }
}

fn list(a: &ListArgs) -> CliResult<Report> {
    let families: Vec<Family> = match &a.family {
        Some(name) => vec![family_arg(name)?],
        None => Family::ALL.to_vec(),
    };
    let descriptors: Vec<Value> =
        families.iter().map(|f| serde_json::to_value(f.descriptor()).unwrap_or(Value::Null)).collect();
    let mut text = String::new();
    let _ = writeln!(text, "{:<30} {:<16} {:<10} domain", "family", "parameters", "kind");
    for (name, params, kind) in list_families() {
        let Some(f) = families.iter().find(|f| f.name() == name) else { continue };
        let d = f.descriptor();
        let kind = serde_json::to_value(kind).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        let _ = writeln!(text, "{name:<30} {:<16} {kind:<10} ({}, {})", params.join(","), d.domain.lo, d.domain.hi);
    }
    let json = match a.family {
        Some(_) => descriptors.into_iter().next().unwrap_or(Value::Null),
        None => Value::Array(descriptors),
    };
    Ok(Report { text, json, code: EXIT_PASS })
}

fn verify(a: &VerifyArgs) -> CliResult<Report> {
    let family = family_arg(&a.family)?;
    let p = family_params(family, &a.params)?;
    let (lo0, hi0) = family.verification_interval(&p);
    let (lo, hi) = (a.lo.unwrap_or(lo0), a.hi.unwrap_or(hi0));
    let grid = UniformGrid::new(lo, hi, a.points)?;
    let report = verify_family_on(family, &p, &grid, a.tol)?;
    let closed = family.energy_shift(&p).ok();
    let mut text = String::new();
    let _ = writeln!(text, "family: {family}");
    let _ = writeln!(text, "params: {}", params_text(&p));
    let _ = writeln!(text, "grid: {} points on [{}, {}]", a.points, num(lo), num(hi));
    report_text(&mut text, "shape invariance", &report);
    if let Some(r) = closed {
        let _ = writeln!(text, "  closed-form R: {}", num(r));
    }
    let json = json!({
        "family": family,
        "params": p,
        "grid": {"lo": lo, "hi": hi, "points": a.points},
        "report": report,
        "closed_form_R": closed,
    });
    Ok(Report { text, json, code: passed(report.passed) })
}

fn spectrum(a: &SpectrumArgs, mut dir: OutputDir, inputs: Value) -> CliResult<Report> {
    let family = family_arg(&a.family)?;
    let p = family_params(family, &a.params)?;
    let s = algebraic_spectrum(family, &p, a.levels)?;
    let mut ok = true;
    let mut text = String::new();
    let _ = writeln!(text, "family: {family}");
    let _ = writeln!(text, "params: {}", params_text(&p));

    let mut json = json!({
        "family": family,
        "params": p,
        "offset": a.offset,
        "algebraic": s.clone().with_offset(a.offset).summary_json(),
    });

    write_spectrum_csv(dir.create("spectrum.csv")?, &s.clone().with_offset(a.offset))?;

    let oracle = if a.oracle {
        let sol = family_oracle(family, &p, a.oracle_points, s.len())?;
        let cmp = compare_spectra(&s, &sol.spectrum, CompareMode::RelativeGap, a.tol)?;
        ok &= cmp.passed && sol.converged;
        write_spectrum_csv(dir.create("oracle.csv")?, &sol.spectrum.clone().with_offset(a.offset))?;
        json["oracle"] = json!({
            "spectrum": sol.spectrum.clone().with_offset(a.offset).summary_json(),
            "box": family.oracle_box(&p),
            "points": a.oracle_points,
            "converged": sol.converged,
            "refinement_change": sol.refinement_change,
            "comparison": cmp,
        });
        Some((sol, cmp))
    } else {
        None
    };

    match &oracle {
        Some((sol, cmp)) => {
            let _ = writeln!(text, "{:>5}  {:>20}  {:>20}  {:>14}", "level", "algebraic", "oracle", "gap deviation");
            for (n, e) in s.energies.iter().enumerate() {
                let _ = writeln!(
                    text,
                    "{n:>5}  {:>20}  {:>20}  {:>14}",
                    num(e + a.offset),
                    num(sol.spectrum.energies[n] + a.offset),
                    num(cmp.deviations[n])
                );
            }
            let _ = writeln!(
                text,
                "oracle: max gap deviation {} (tolerance {}), converged {}: {}",
                num(cmp.max_deviation),
                num(a.tol),
                sol.converged,
                status(cmp.passed && sol.converged)
            );
        }
        None => {
            let _ = writeln!(text, "{:>5}  {:>20}", "level", "energy");
            for (n, e) in s.energies.iter().enumerate() {
                let _ = writeln!(text, "{n:>5}  {:>20}", num(e + a.offset));
            }
        }
    }
    if s.truncated {
        let _ = writeln!(text, "truncated: the ladder ends after {} level(s)", s.len());
    }

    if a.wavefunctions {
        let (lo, hi) = family.oracle_box(&p);
        let grid = UniformGrid::interior(lo, hi, 4096)?;
        let ladder = ladder_wavefunctions(family, &p, s.len(), &grid)?;
        write_wavefunctions_csv(dir.create("wavefunctions.csv")?, &ladder.wavefunctions)?;
    }

    let files = dir.finish("spectrum", inputs, ok)?;
    json["files"] = json!(files);
    let code = if !ok {
        EXIT_FAIL
    } else if s.truncated {
        EXIT_TRUNCATED
    } else {
        EXIT_PASS
    };
    Ok(Report { text, json, code })
}

fn coefficient(c: f64) -> String {
    if c == 1.0 {
        String::new()
    } else if c == -1.0 {
        "-".into()
    } else {
        num(c)
    }
}

/// Closed-form text of `W(x)`.
pub fn descriptor(w: &ConstructedSuperpotential) -> String {
    let (l, al) = (w.lambda, w.alpha);
    let arg = |k: f64| format!("{}x", coefficient(k * al));
    let main = match &w.seed.branch {
        SeedBranch::Linear { b, .. } if *b == 0.0 => format!("{}/x", num(l / al)),
        SeedBranch::Linear { a, b } => format!("{}/({} + {})", num(l * a), arg(*a), num(*b)),
        SeedBranch::Sin { k } => format!("{}cot({})", coefficient(l * k), arg(*k)),
        SeedBranch::Cos { k } => format!("{}tan({})", coefficient(-l * k), arg(*k)),
        SeedBranch::Sinh { c } => format!("{}coth({})", coefficient(l * c), arg(*c)),
        SeedBranch::Cosh { c } => format!("{}tanh({})", coefficient(l * c), arg(*c)),
        SeedBranch::Exp { c } => num(l * c),
        SeedBranch::Custom(_) => format!("{}u'(ξ)/u(ξ)", coefficient(l)),
    };
    let mut s = format!("W(x) = {main}");
    if let Some(phi) = w.phi_params {
        let u = match &w.seed.branch {
            SeedBranch::Linear { a, b } => format!("{}ξ + {}", coefficient(*a), num(*b)),
            SeedBranch::Sin { k } => format!("sin({}ξ)", coefficient(*k)),
            SeedBranch::Cos { k } => format!("cos({}ξ)", coefficient(*k)),
            SeedBranch::Sinh { c } => format!("sinh({}ξ)", coefficient(*c)),
            SeedBranch::Cosh { c } => format!("cosh({}ξ)", coefficient(*c)),
            SeedBranch::Exp { c } => format!("exp({}ξ)", coefficient(*c)),
            SeedBranch::Custom(_) => "sampled".into(),
        };
        let _ = write!(s, " + ({} ∫u dξ + {})/u(ξ)", num(phi.c), num(phi.d));
        if w.g.is_some() {
            let _ = write!(s, " + {}", num(w.g_value()));
        }
        let _ = write!(s, ", u(ξ) = {u}, ξ = {}", arg(1.0));
    } else if w.g.is_some() {
        let _ = write!(s, " + {}", num(w.g_value()));
    }
    s
}

/// Closed-form `V⁺(λ) − V⁻(λ − α)`: `−α(2λ − α)K`, plus `2αC` from the
/// second-solution term or `c²(1/λ² − 1/(λ − α)²)` from the constant one.
/// The two extensions together are not shape invariant under this ladder.
fn expected_constant(w: &ConstructedSuperpotential) -> Option<f64> {
    let base = w.expected_shift();
    match (w.phi_params, w.g) {
        (None, None) => Some(base),
        (Some(phi), None) => Some(base + 2.0 * w.alpha * phi.c),
        (None, Some(g)) => {
            let mu = w.stepped_lambda();
            Some(base + g.c * g.c * (1.0 / (w.lambda * w.lambda) - 1.0 / (mu * mu)))
        }
        (Some(_), Some(_)) => None,
    }
}

fn construct(a: &ConstructArgs, mut dir: OutputDir, inputs: Value) -> CliResult<Report> {
    let branch = SeedBranch::standard(&a.branch, a.k)?;
    let mut w = construct_case(SeedSolution::new(a.k, branch)?, a.alpha, a.lambda)?;
    if a.c_coef.is_some() || a.d_coef.is_some() {
        w = extend_second_solution(&w, a.c_coef.unwrap_or(0.0), a.d_coef.unwrap_or(0.0))?;
    }
    if let Some(c) = a.c {
        w = extend_constant_shift(&w, c)?;
    }
    if !(a.lo < a.hi) {
        return Err(CliError::Usage(format!("empty interval [{}, {}]", a.lo, a.hi)));
    }
    let poles = w.poles_in(a.lo, a.hi);
    let intervals = w.working_intervals(a.lo, a.hi);
    if intervals.is_empty() {
        return Err(CliError::Usage("no pole-free interval to sample".into()));
    }
    let expected = expected_constant(&w);

    let mut reports = Vec::with_capacity(intervals.len());
    let mut csv = csv::Writer::from_writer(dir.create("superpotential.csv")?);
    csv.write_record(["x", "W", "W_prime", "V_minus", "V_plus"])?;
    for &(lo, hi) in &intervals {
        let grid = UniformGrid::new(lo, hi, a.points)?;
        let r = verify_shape_invariance(
            |p, x| w.w_param(p, x),
            |p, x| w.w_prime_param(p, x),
            &w.params(),
            |p| w.tau(p),
            &grid,
            a.tol,
        )?;
        reports.push(r);
        for x in grid.points() {
            let (wx, wpx) = (w.w(x), w.w_prime(x));
            csv.write_record([num(x), num(wx), num(wpx), num(wx * wx - wpx), num(wx * wx + wpx)])?;
        }
    }
    csv.flush()?;
    drop(csv);

    let constant = reports[0].estimated_constant;
    let consistent = reports
        .iter()
        .all(|r| (r.estimated_constant - constant).abs() <= a.tol * constant.abs().max(1.0));
    let expected_ok = expected.map_or(true, |e| (e - constant).abs() <= a.tol * e.abs().max(1.0));
    let ok = reports.iter().all(|r| r.passed) && consistent && expected_ok;

    let desc = descriptor(&w);
    let mut text = String::new();
    let _ = writeln!(text, "{desc}");
    let _ = writeln!(text, "seed: {} branch, K = {}", w.seed.branch.name(), num(a.k));
    let _ = writeln!(text, "ladder: lambda {} -> {}", num(w.lambda), num(w.stepped_lambda()));
    if !poles.is_empty() {
        let p: Vec<String> = poles.iter().map(|p| num(*p)).collect();
        let _ = writeln!(text, "poles in [{}, {}]: {}", num(a.lo), num(a.hi), p.join(", "));
    }
    for (r, (lo, hi)) in reports.iter().zip(&intervals) {
        report_text(&mut text, &format!("shape invariance on [{}, {}]", num(*lo), num(*hi)), r);
    }
    if let Some(e) = expected {
        let _ = writeln!(text, "expected constant: {}", num(e));
    }
    let _ = writeln!(text, "status: {}", status(ok));

    let json_body = json!({
        "descriptor": desc,
        "construction": w,
        "poles": poles,
        "intervals": intervals,
        "reports": reports,
        "estimated_constant": constant,
        "expected_constant": expected,
        "passed": ok,
    });
    dir.write_json("construction.json", &json_body)?;
    let files = dir.finish("construct", inputs, ok)?;
    let mut json = json_body;
    json["files"] = json!(files);
    Ok(Report { text, json, code: passed(ok) })
}

fn parse_region(s: &str) -> CliResult<Region> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("bad region value `{t}`"))))
        .collect::<CliResult<_>>()?;
    if v.len() != 4 {
        return Err(CliError::Usage("region needs r_lo,r_hi,theta_lo,theta_hi".into()));
    }
    Ok(Region::new(v[0], v[1], v[2], v[3])?)
}

fn three_d(a: &ThreeDArgs, mut dir: OutputDir, inputs: Value) -> CliResult<Report> {
    let seed = laplace_seed(parse_legendre_terms(&a.seed)?)?;
    let region = parse_region(&a.region)?;
    let grid = Grid2D::new(region, a.nr, a.ntheta)?;
    let mu = a.mu.unwrap_or(a.lambda - 1.0);
    let riccati = prepotential_riccati_residual(&seed, &grid, a.tol)?;
    let si = verify_3d_shape_invariance(&seed, a.lambda, mu, &grid, a.tol)?;
    let fields = partner_fields(&seed, a.lambda, &grid)?;
    write_partner_csv(dir.create("partners.csv")?, &fields)?;
    dir.write_json("seed.json", &seed_manifest(&seed, a.lambda, &region))?;
    let ok = riccati.passed && si.passed;

    let mut text = String::new();
    let _ = writeln!(text, "seed: {}", a.seed);
    let _ = writeln!(text, "grid: {} x {}", a.nr, a.ntheta);
    let _ = writeln!(text, "lambda = {}, mu = {}", num(a.lambda), num(mu));
    report_text(&mut text, "riccati residual", &riccati);
    report_text(&mut text, "shape invariance", &si);
    let _ = writeln!(text, "status: {}", status(ok));
    let files = dir.finish("3d", inputs, ok)?;
    let json = json!({
        "seed": seed,
        "region": region,
        "lambda": a.lambda,
        "mu": mu,
        "riccati": riccati,
        "shape_invariance": si,
        "passed": ok,
        "files": files,
    });
    Ok(Report { text, json, code: passed(ok) })
}

fn radial(a: &RadialArgs, mut dir: OutputDir, inputs: Value) -> CliResult<Report> {
    if a.ell == 0 {
        return Err(CliError::Usage("radial needs --ell >= 1".into()));
    }
    let l = a.ell as f64;
    let fac = centrifugal(l, Scheme::ProductCb);
    let partner_dev = RADII
        .iter()
        .map(|&r| {
            let (vm, vp) = fac.partners_at(r);
            (vm - l * (l + 1.0) / (r * r)).abs().max((vp - l * (l - 1.0) / (r * r)).abs())
        })
        .fold(0.0, f64::max);
    let grid = UniformGrid::new(a.lo, a.hi, a.points)?;
    let intertwine = write_recurrence_csv(dir.create("recurrence.csv")?, a.ell, a.k, &grid)?;

    let mut text = String::new();
    let _ = writeln!(text, "ell = {}", a.ell);
    let _ = writeln!(text, "product-CB partners: max deviation {}", num(partner_dev));
    let _ = writeln!(
        text,
        "sampled intertwining B j_ell(kr) vs k j_(ell-1)(kr): max deviation {}",
        num(intertwine)
    );
    let mut ok = partner_dev < 1e-12;
    let mut rows = Vec::new();
    if a.check_bessel {
        let _ = writeln!(text, "{:>6}  {:>20}  {:>20}  {:>14}  {:>14}", "r", "j_ell", "j_ell'", "recurrence", "wronskian");
        for r in RADII {
            let (j, n) = spherical_bessel_oracle(a.ell, r)?;
            let (dj, dn) = spherical_bessel_derivatives(a.ell, r)?;
            let rec = bessel_recurrence_residual(a.ell, r)?;
            let wron = ((j * dn - dj * n) * r * r - 1.0).abs();
            ok &= rec < a.tol && wron < a.tol;
            let _ = writeln!(text, "{:>6}  {:>20}  {:>20}  {:>14}  {:>14}", num(r), num(j), num(dj), num(rec), num(wron));
            rows.push(json!({"r": r, "j": j, "j_prime": dj, "recurrence": rec, "wronskian": wron}));
        }
    }
    let _ = writeln!(text, "status: {}", status(ok));
    let files = dir.finish("radial", inputs, ok)?;
    let json = json!({
        "ell": a.ell,
        "partner_deviation": partner_dev,
        "intertwining_deviation": intertwine,
        "bessel": rows,
        "passed": ok,
        "files": files,
    });
    Ok(Report { text, json, code: passed(ok) })
}

fn parse_increments(spec: &str) -> CliResult<Vec<(String, f64)>> {
    spec.split(',')
        .map(|item| {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("candidate `{item}` must look like NAME=STEP")))?;
            let v = v.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("bad step in `{item}`")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

fn scan(a: &ScanArgs) -> CliResult<Report> {
    let family = family_arg(&a.family)?;
    let p = family_params(family, &a.params)?;
    let grid = family.verification_grid(&p, a.points)?;
    let mut text = String::new();
    let _ = writeln!(text, "family: {family}");
    let _ = writeln!(text, "params: {}", params_text(&p));
    let mut rows = Vec::new();
    let mut any = false;
    for spec in &a.candidates {
        let inc = parse_increments(spec)?;
        for (name, _) in &inc {
            if p.get(name).is_none() {
                return Err(CliError::Usage(format!("{family} has no parameter `{name}`")));
            }
        }
        let tau = |q: &ParamSet| {
            let mut out = q.clone();
            for (name, step) in &inc {
                out.set(name, q.get(name).unwrap_or(f64::NAN) + step);
            }
            out
        };
        let r = verify_shape_invariance(|q, x| family.w(q, x), |q, x| family.w_prime(q, x), &p, tau, &grid, a.tol);
        let (ok, dev, constant) = match &r {
            Ok(r) => (r.passed, r.max_residual, r.estimated_constant),
            Err(_) => (false, f64::INFINITY, f64::NAN),
        };
        any |= ok;
        let _ = writeln!(text, "{spec:<16} {}  max deviation {}  R {}", status(ok), num(dev), num(constant));
        rows.push(json!({"candidate": spec, "report": r.ok(), "passed": ok}));
    }
    let json = json!({"family": family, "params": p, "candidates": rows});
    Ok(Report { text, json, code: passed(any) })
}
