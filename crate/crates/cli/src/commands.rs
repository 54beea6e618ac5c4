use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use wiener_chaos::brownian::{
    derivative_of_skorokhod_residual, extended_isometry, ito_integral, skorokhod_integral, StepProcess, TimeGrid,
};
use wiener_chaos::chaos::{chaos_to_poly, poly_to_chaos, ChaosExpansion};
use wiener_chaos::density::density_estimate;
use wiener_chaos::gaussian_core::{isserlis_moment, isserlis_moment_recursive, CovMatrix};
use wiener_chaos::gaussian_measure::{GaussianMeasureFD, MeasureDescriptor};
use wiener_chaos::hermite::HermiteTable;
use wiener_chaos::mc::{estimate_expectation, z_test_compare, McConfig};
use wiener_chaos::poly::{Basis, TermsDocument};
use wiener_chaos::scalar::factorial;
use wiener_chaos::verify::{run_suites, scaled_diff, Record, Report, ReportHeader, Suite, VerifyOptions};
use wiener_chaos::{Error, Poly};

use crate::config::Format;

/// Rendered output plus whether every check passed.
pub struct Outcome {
    pub body: String,
    pub pass: bool,
}

impl Outcome {
    fn new<T: Serialize>(value: &T, csv: impl FnOnce() -> String, format: Format, pass: bool) -> Self {
        let body = match format {
            Format::Json => serde_json::to_string_pretty(value).expect("output serializes") + "\n",
            Format::Csv => csv(),
        };
        Self { body, pass }
    }
}

fn header(command: &str, seed: u64) -> ReportHeader {
    Report::new(command, seed, Vec::new()).header
}

pub fn poly_from_document(doc: &TermsDocument) -> wiener_chaos::Result<Poly> {
    match doc.basis {
        Basis::Monomial => Poly::from_document(doc),
        Basis::Chaos => Ok(chaos_to_poly(&ChaosExpansion::from_document(doc)?)),
    }
}

fn to_zero_based(indices: &[usize], dim: usize) -> wiener_chaos::Result<Vec<usize>> {
    indices
        .iter()
        .map(|&i| {
            if i == 0 || i > dim {
                Err(Error::IndexOutOfRange { index: i, dim })
            } else {
                Ok(i - 1)
            }
        })
        .collect()
}

#[derive(Serialize)]
struct MomentRow {
    indices: Vec<usize>,
    moment: f64,
}

#[derive(Serialize)]
struct IsserlisOutput {
    header: ReportHeader,
    cov: Vec<Vec<f64>>,
    moments: Vec<MomentRow>,
    records: Vec<Record>,
}

/// Nondecreasing index tuples of the given length over `1..=n`.
fn tuples(n: usize, len: usize) -> Vec<Vec<usize>> {
    if len == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for t in tuples(n, len - 1) {
        let start = t.last().copied().unwrap_or(1);
        for i in start..=n {
            let mut next = t.clone();
            next.push(i);
            out.push(next);
        }
    }
    out
}

pub fn isserlis(
    cov: Vec<Vec<f64>>,
    indices: Option<Vec<usize>>,
    max_order: usize,
    seed: u64,
    format: Format,
) -> wiener_chaos::Result<Outcome> {
    let c = CovMatrix::new(cov.clone())?;
    let n = c.dim();
    let list = match indices {
        Some(ix) => vec![ix],
        None => (1..=max_order / 2).flat_map(|k| tuples(n, 2 * k)).collect(),
    };
    let mut moments = Vec::new();
    let mut records = Vec::new();
    for ix in list {
        let zero = to_zero_based(&ix, n)?;
        let a = isserlis_moment(&c, &zero)?;
        let b = isserlis_moment_recursive(&c, &zero)?;
        records.push(Record::new("ISSERLIS-RECURSION", format!("{ix:?}"), scaled_diff(a, b), 1e-9));
        moments.push(MomentRow { indices: ix, moment: a });
    }
    let pass = records.iter().all(|r| r.pass);
    let out = IsserlisOutput {
        header: header("isserlis", seed),
        cov,
        moments,
        records,
    };
    Ok(Outcome::new(
        &out,
        || {
            let mut s = String::from("indices,moment\n");
            for m in &out.moments {
                let ix: Vec<String> = m.indices.iter().map(usize::to_string).collect();
                s.push_str(&format!("\"{}\",{}\n", ix.join(","), m.moment));
            }
            s
        },
        format,
        pass,
    ))
}

#[derive(Serialize)]
struct HermiteRow {
    n: usize,
    /// Monomial coefficients, lowest power first.
    coefficients: Vec<f64>,
    /// `n! H_n`, which has integer coefficients.
    scaled: Vec<f64>,
    formula: String,
}

#[derive(Serialize)]
struct HermiteOutput {
    header: ReportHeader,
    polynomials: Vec<HermiteRow>,
}

fn formula(scaled: &[f64], n: usize) -> String {
    let mut parts = String::new();
    for (k, &c) in scaled.iter().enumerate().rev() {
        if c == 0.0 {
            continue;
        }
        let mag = c.abs();
        let sign = if c < 0.0 { "-" } else { "+" };
        if parts.is_empty() {
            if c < 0.0 {
                parts.push('-');
            }
        } else {
            parts.push_str(&format!(" {sign} "));
        }
        let coef = if mag == 1.0 && k > 0 { String::new() } else { format!("{mag}") };
        let var = match k {
            0 => String::new(),
            1 => "x".into(),
            _ => format!("x^{k}"),
        };
        parts.push_str(&coef);
        parts.push_str(&var);
    }
    if n <= 1 {
        parts
    } else {
        format!("({parts})/{}", factorial::<f64>(n as u32))
    }
}

pub fn hermite(n: Option<usize>, max_degree: usize, seed: u64, format: Format) -> wiener_chaos::Result<Outcome> {
    let top = n.unwrap_or(max_degree);
    let table = HermiteTable::<f64>::new(top);
    let range: Vec<usize> = match n {
        Some(k) => vec![k],
        None => (0..=max_degree).collect(),
    };
    let mut polynomials = Vec::new();
    for k in range {
        let coefficients = table.monomial_coeffs(k)?.to_vec();
        let nf: f64 = factorial(k as u32);
        let scaled: Vec<f64> = coefficients.iter().map(|c| (c * nf).round()).collect();
        polynomials.push(HermiteRow {
            n: k,
            formula: formula(&scaled, k),
            coefficients,
            scaled,
        });
    }
    let out = HermiteOutput {
        header: header("hermite", seed),
        polynomials,
    };
    Ok(Outcome::new(
        &out,
        || {
            let mut s = String::from("n,power,coefficient\n");
            for p in &out.polynomials {
                for (k, c) in p.coefficients.iter().enumerate() {
                    s.push_str(&format!("{},{},{}\n", p.n, k, c));
                }
            }
            s
        },
        format,
        true,
    ))
}

#[derive(Serialize)]
struct ChaosOutput {
    header: ReportHeader,
    expansion: TermsDocument,
    mean: f64,
    norm_sq: f64,
    /// `‖J_n F‖²` by order.
    chaos_norms_sq: BTreeMap<usize, f64>,
}

pub fn chaos(poly: &TermsDocument, seed: u64, format: Format) -> wiener_chaos::Result<Outcome> {
    let f = poly_from_document(poly)?;
    let c = poly_to_chaos(&f);
    let out = ChaosOutput {
        header: header("chaos", seed),
        expansion: c.to_document(),
        mean: c.mean(),
        norm_sq: c.norm_sq(),
        chaos_norms_sq: c.chaos_norms_sq(),
    };
    Ok(Outcome::new(
        &out,
        || {
            let mut s = String::from("order,norm_sq\n");
            for (n, v) in &out.chaos_norms_sq {
                s.push_str(&format!("{n},{v}\n"));
            }
            s
        },
        format,
        true,
    ))
}

pub fn verify(suites: &[Suite], opts: &VerifyOptions, format: Format) -> wiener_chaos::Result<Outcome> {
    let report = run_suites(suites, opts)?;
    let pass = report.all_pass();
    Ok(Outcome::new(&report, || report.to_csv(), format, pass))
}

#[derive(Serialize)]
struct SkorokhodRow {
    process: String,
    adapted: bool,
    /// `E[δ(u)²]`.
    lhs: f64,
    /// `E∫u²`.
    inner: f64,
    /// `E∫∫ D_s u(t) D_t u(s)`.
    correction: f64,
    residual: f64,
}

#[derive(Serialize)]
struct SkorokhodOutput {
    header: ReportHeader,
    cells: usize,
    table: Vec<SkorokhodRow>,
    records: Vec<Record>,
}

pub fn skorokhod(cells: usize, seed: u64, format: Format) -> wiener_chaos::Result<Outcome> {
    let grid = TimeGrid::new(cells)?;
    let n = cells;
    let b = |k: usize| grid.brownian_at::<f64>(k);
    let processes: Vec<(&str, StepProcess<f64>)> = vec![
        ("B_t", StepProcess::new(grid, (0..n).map(b).collect::<Result<_, _>>()?)?),
        (
            "B_t^2",
            StepProcess::new(grid, (0..n).map(|k| b(k).map(|p| &p * &p)).collect::<Result<_, _>>()?)?,
        ),
        ("B_1", StepProcess::new(grid, vec![b(n)?; n])?),
        (
            "B_1 - B_t",
            StepProcess::new(grid, (0..n).map(|k| Ok(&b(n)? - &b(k)?)).collect::<wiener_chaos::Result<_>>()?)?,
        ),
        (
            "B_1 B_t",
            StepProcess::new(grid, (0..n).map(|k| Ok(&b(n)? * &b(k)?)).collect::<wiener_chaos::Result<_>>()?)?,
        ),
    ];

    let mut table = Vec::new();
    let mut records = Vec::new();
    for (name, u) in &processes {
        let iso = extended_isometry(u, u)?;
        let adapted = u.is_adapted();
        if adapted {
            let r = skorokhod_integral(u).max_abs_diff(&ito_integral(u)?);
            records.push(Record::new("SKOROKHOD-EQUALS-ITO", name.to_string(), r, 1e-9));
            records.push(Record::new("ADAPTED-CORRECTION-ZERO", name.to_string(), iso.correction.abs(), 0.0));
        }
        records.push(Record::new("EXTENDED-ISOMETRY", name.to_string(), iso.residual(), 1e-9));
        let mut r = 0.0f64;
        for cell in 0..n {
            r = r.max(derivative_of_skorokhod_residual(u, cell)?);
        }
        records.push(Record::new("DERIVATIVE-OF-SKOROKHOD", name.to_string(), r, 1e-9));
        table.push(SkorokhodRow {
            process: name.to_string(),
            adapted,
            lhs: iso.lhs,
            inner: iso.inner,
            correction: iso.correction,
            residual: iso.residual(),
        });
    }
    let pass = records.iter().all(|r| r.pass);
    let out = SkorokhodOutput {
        header: header("skorokhod", seed),
        cells,
        table,
        records,
    };
    Ok(Outcome::new(
        &out,
        || {
            let mut s = String::from("process,adapted,lhs,inner,correction,residual\n");
            for r in &out.table {
                s.push_str(&format!(
                    "{},{},{},{},{},{:e}\n",
                    r.process, r.adapted, r.lhs, r.inner, r.correction, r.residual
                ));
            }
            s
        },
        format,
        pass,
    ))
}

/// Brownian sample paths as CSV; there is no JSON form.
pub fn skorokhod_paths(cells: usize, paths: usize, cfg: &McConfig) -> wiener_chaos::Result<Outcome> {
    let grid = TimeGrid::new(cells)?;
    Ok(Outcome {
        body: grid.sample_paths_csv(cfg, paths),
        pass: true,
    })
}

#[derive(Serialize)]
struct DensityOutput {
    header: ReportHeader,
    estimate: wiener_chaos::density::DensityEstimate,
}

pub fn density(poly: &TermsDocument, xs: &[f64], cfg: &McConfig, format: Format) -> wiener_chaos::Result<Outcome> {
    let f = poly_from_document(poly)?;
    let estimate = density_estimate(&f, xs, cfg)?;
    let pass = estimate.reliable;
    let out = DensityOutput {
        header: header("density", cfg.seed),
        estimate,
    };
    Ok(Outcome::new(&out, || out.estimate.to_csv(), format, pass))
}

#[derive(Serialize)]
struct CameronMartinOutput {
    header: ReportHeader,
    measure: MeasureDescriptor,
    h: Vec<f64>,
    member: bool,
    /// Preimage `z` with `h = Q^{1/2} z`, when `h` is a member.
    z: Option<Vec<f64>>,
    norm_h: Option<f64>,
    records: Vec<Record>,
}

pub fn cameron_martin(
    measure: &MeasureDescriptor,
    h: &[f64],
    poly: &TermsDocument,
    points: usize,
    cfg: &McConfig,
    format: Format,
) -> wiener_chaos::Result<Outcome> {
    let g = GaussianMeasureFD::from_descriptor(measure)?;
    let f = poly_from_document(poly)?;
    let m = g.dim();
    let embedded = g.cameron_martin_embed(h)?;
    let mut records = Vec::new();
    if let (Some(cm), true) = (&embedded, g.is_nondegenerate()) {
        let (lhs, rhs) = g.change_of_variables(&f, cm)?;
        records.push(Record::new("CM-CHANGE-OF-VARIABLES", "f", scaled_diff(lhs, rhs), 1e-9));
        records.push(Record::new("GAUSSIAN-IBP", "f, z", g.gaussian_ibp_residual(&f, &cm.z)?, 1e-9));

        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let (mut rel, mut norm, mut hw) = (0.0f64, 0.0f64, 0.0f64);
        for _ in 0..points {
            let x: Vec<f64> = (0..m).map(|_| rng.random_range(-3.0..3.0)).collect();
            let (a, b) = g.gradient_relation_residuals(&f, &x)?;
            let scale = 1f64.max(g.gradients(&f, &x)?.grad_h.iter().fold(0.0f64, |s, v| s.max(v.abs())));
            rel = rel.max(a / scale);
            norm = norm.max(b / scale);
            hw = hw.max((g.hhat_eval(cm, &x)? - g.white_noise_eval(&cm.z, &x)?).abs());
        }
        let label = format!("{points} points");
        records.push(Record::new("CM-GRADIENT-RELATION", label.clone(), rel, 1e-12));
        records.push(Record::new("CM-GRADIENT-NORM", label.clone(), norm, 1e-12));
        records.push(Record::new("HHAT-EQUALS-WHITE-NOISE", label, hw, 1e-10));

        let r = estimate_expectation(m, cfg, |xi| {
            let mut x = vec![0.0; m];
            g.transform(xi, &mut x);
            let test = |y: &[f64]| y.iter().sum::<f64>().cos();
            let shifted: Vec<f64> = x.iter().zip(&cm.h).map(|(a, b)| a + b).collect();
            test(&shifted) - test(&x) * g.cm_density(cm, &x).expect("nondegenerate")
        })?;
        let z = z_test_compare(0.0, &r, cfg);
        let mut rec = Record::new("CM-SHIFT-MC", "g=cos(sum x)", r.mean.abs(), cfg.confidence_multiplier * r.std_error);
        rec.pass = z.pass;
        records.push(rec);
    }
    let exact = g.char_function(h)?;
    let (re, im) = g.char_function_mc(h, cfg)?;
    for (name, e, r) in [("CHAR-FUNCTION-MC-RE", exact.re, re), ("CHAR-FUNCTION-MC-IM", exact.im, im)] {
        let z = z_test_compare(e, &r, cfg);
        let mut rec = Record::new(name, "f=h", (e - r.mean).abs(), cfg.confidence_multiplier * r.std_error);
        rec.pass = z.pass;
        records.push(rec);
    }
    let pass = records.iter().all(|r| r.pass);
    let out = CameronMartinOutput {
        header: header("cameron-martin", cfg.seed),
        measure: g.descriptor(),
        h: h.to_vec(),
        member: embedded.is_some(),
        z: embedded.as_ref().map(|c| c.z.clone()),
        norm_h: embedded.as_ref().map(|c| c.norm),
        records,
    };
    let csv = || Report::new("cameron-martin", cfg.seed, out.records.clone()).to_csv();
    Ok(Outcome::new(&out, csv, format, pass))
}
