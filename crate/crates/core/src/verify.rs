//! Named verification suites. Each suite draws its instances from a
//! `ChaCha8Rng` keyed by the run seed and a per-suite stream, so a suite
//! produces the same records whether it runs alone or inside `all`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::brownian::{
    derivative_of_skorokhod_residual, extended_isometry, ito_integral, skorokhod_integral, StepProcess, TimeGrid,
};
use crate::chaos::{chaos_to_poly, expectation_exact, l2_inner, l2_inner_chaos, poly_to_chaos};
use crate::density::{density_estimate, shift_weight, SINGULAR_EPS};
use crate::error::{Error, Result};
use crate::gaussian_core::{isonormal_map, isserlis_moment, isserlis_moment_recursive, pair_partitions, CovMatrix, HVector};
use crate::gaussian_measure::GaussianMeasureFD;
use crate::hermite::{gauss_hermite, HermiteTable};
use crate::mc::{estimate_expectation, estimate_many, z_test_compare, McConfig};
use crate::operators::{
    cauchy_generator, cauchy_semigroup, identity_residual, ou_generator, ou_semigroup, sobolev_norm_sq,
    sobolev_norm_sq_direct, spectral_apply_chaos, HField, IdentityId, IdentityInput,
};
use crate::poly::{MultiIndex, PolyFunctional};
use crate::scalar::{double_factorial, factorial};

type Poly = PolyFunctional<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Isserlis,
    Hermite,
    Chaos,
    Operators,
    Semigroup,
    Sobolev,
    Skorokhod,
    Density,
    CameronMartin,
    Mc,
}

impl Suite {
    pub const ALL: [Suite; 10] = [
        Suite::Isserlis,
        Suite::Hermite,
        Suite::Chaos,
        Suite::Operators,
        Suite::Semigroup,
        Suite::Sobolev,
        Suite::Skorokhod,
        Suite::Density,
        Suite::CameronMartin,
        Suite::Mc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Isserlis => "isserlis",
            Suite::Hermite => "hermite",
            Suite::Chaos => "chaos",
            Suite::Operators => "operators",
            Suite::Semigroup => "semigroup",
            Suite::Sobolev => "sobolev",
            Suite::Skorokhod => "skorokhod",
            Suite::Density => "density",
            Suite::CameronMartin => "cameron-martin",
            Suite::Mc => "mc",
        }
    }

    fn stream(self) -> u64 {
        Suite::ALL.iter().position(|&s| s == self).expect("listed") as u64 + 1
    }

    /// Parses a comma-separated list; `all` expands to every suite.
    pub fn parse_list(s: &str) -> Result<Vec<Suite>> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            if part.eq_ignore_ascii_case("all") {
                out.extend(Suite::ALL);
            } else {
                out.push(part.parse()?);
            }
        }
        if out.is_empty() {
            return Err(Error::InvalidConfig("no suite given".into()));
        }
        out.sort();
        out.dedup();
        Ok(out)
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown suite `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub identity: String,
    pub instance: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Record {
    pub fn new(identity: impl Into<String>, instance: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self {
            identity: identity.into(),
            instance: instance.into(),
            residual,
            tolerance,
            pass: residual.is_finite() && residual <= tolerance,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportHeader {
    pub command: String,
    pub seed: u64,
    pub version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub header: ReportHeader,
    pub records: Vec<Record>,
}

impl Report {
    pub fn new(command: impl Into<String>, seed: u64, records: Vec<Record>) -> Self {
        Self {
            header: ReportHeader {
                command: command.into(),
                seed,
                version: env!("CARGO_PKG_VERSION").to_string(),
            },
            records,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(|r| !r.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// CSV with columns `identity,instance,residual,tolerance,pass`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("identity,instance,residual,tolerance,pass\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},\"{}\",{:e},{:e},{}\n",
                r.identity, r.instance, r.residual, r.tolerance, r.pass
            ));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Samples per Monte Carlo check.
    pub mc_samples: usize,
    pub n_workers: usize,
    pub confidence_multiplier: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 42,
            mc_samples: 1_000_000,
            n_workers: 1,
            confidence_multiplier: 4.0,
        }
    }
}

impl VerifyOptions {
    fn mc(&self, salt: u64) -> McConfig {
        McConfig {
            n_samples: self.mc_samples,
            seed: self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(salt),
            confidence_multiplier: self.confidence_multiplier,
            n_workers: self.n_workers,
        }
    }

    fn rng(&self, suite: Suite) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(suite.stream());
        rng
    }
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Result<Vec<Record>> {
    match suite {
        Suite::Isserlis => isserlis_suite(opts),
        Suite::Hermite => hermite_suite(),
        Suite::Chaos => chaos_suite(opts),
        Suite::Operators => operators_suite(opts),
        Suite::Semigroup => semigroup_suite(opts),
        Suite::Sobolev => sobolev_suite(opts),
        Suite::Skorokhod => skorokhod_suite(opts),
        Suite::Density => density_suite(opts),
        Suite::CameronMartin => cameron_martin_suite(opts),
        Suite::Mc => mc_suite(opts),
    }
}

pub fn run_suites(suites: &[Suite], opts: &VerifyOptions) -> Result<Report> {
    let mut records = Vec::new();
    for &s in suites {
        records.extend(run_suite(s, opts)?);
    }
    Ok(Report::new("verify", opts.seed, records))
}

/// `|a - b| / max(1, |a|, |b|)`: relative for large values, absolute near zero.
pub fn scaled_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1f64.max(a.abs()).max(b.abs())
}

fn coeff(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(-1.0..1.0)
}

/// Sparse random polynomial whose monomials use only `coords`.
fn random_poly_on(rng: &mut ChaCha8Rng, d: usize, coords: &[usize], max_deg: usize, max_terms: usize) -> Poly {
    let n_terms = rng.random_range(1..=max_terms);
    let terms = (0..n_terms).map(|_| {
        let mut dense = vec![0u32; d];
        if !coords.is_empty() {
            for _ in 0..rng.random_range(0..=max_deg) {
                dense[coords[rng.random_range(0..coords.len())]] += 1;
            }
        }
        (MultiIndex::from_dense(&dense), coeff(rng))
    });
    let terms: Vec<_> = terms.collect();
    PolyFunctional::from_terms(d, terms).expect("generated terms are in range")
}

fn random_poly(rng: &mut ChaCha8Rng, d: usize, max_deg: usize, max_terms: usize) -> Poly {
    let coords: Vec<usize> = (0..d).collect();
    random_poly_on(rng, d, &coords, max_deg, max_terms)
}

fn random_vec(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| coeff(rng)).collect()
}

fn random_hvec(rng: &mut ChaCha8Rng, d: usize) -> HVector<f64> {
    HVector::new(random_vec(rng, d)).expect("nonempty")
}

fn random_field(rng: &mut ChaCha8Rng, d: usize, max_deg: usize) -> HField<f64> {
    HField::from_components((0..d).map(|_| random_poly(rng, d, max_deg, 4)).collect()).expect("same dimension")
}

/// `A Aᵀ / n + shift·I` with `A` uniform on `[-1, 1]`.
fn random_cov(rng: &mut ChaCha8Rng, n: usize, shift: f64) -> Vec<Vec<f64>> {
    let a: Vec<Vec<f64>> = (0..n).map(|_| random_vec(rng, n)).collect();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let s: f64 = (0..n).map(|k| a[i][k] * a[j][k]).sum::<f64>() / n as f64;
                    if i == j {
                        s + shift
                    } else {
                        s
                    }
                })
                .collect()
        })
        .collect()
}

fn isserlis_suite(opts: &VerifyOptions) -> Result<Vec<Record>> {
    const INSTANCES: usize = 100;
    const MAX_DIM: usize = 8;
    let mut rng = opts.rng(Suite::Isserlis);
    let mut out = Vec::new();

    for n in (0..=12).step_by(2) {
        let count = pair_partitions(n)?.len() as f64;
        let want: f64 = double_factorial(n as i64 - 1);
        out.push(Record::new("ISSERLIS-PAIRINGS", format!("n={n}"), (count - want).abs(), 0.0));
    }

    let mut instances = Vec::with_capacity(INSTANCES);
    for _ in 0..INSTANCES {
        let n = rng.random_range(1..=MAX_DIM);
        let cov = random_cov(&mut rng, n, 0.0);
        let len = rng.random_range(1..=10);
        let idx: Vec<usize> = (0..len).map(|_| rng.random_range(0..n)).collect();
        instances.push((cov, idx));
    }

    let mut exact = Vec::with_capacity(INSTANCES);
    let mut sqrt = Vec::with_capacity(INSTANCES);
    for (k, (cov, idx)) in instances.iter().enumerate() {
        let c = CovMatrix::new(cov.clone())?;
        let a = isserlis_moment(&c, idx)?;
        let b = isserlis_moment_recursive(&c, idx)?;
        let one_based: Vec<usize> = idx.iter().map(|i| i + 1).collect();
        let label = format!("#{k} n={} idx={one_based:?}", cov.len());
        out.push(Record::new("ISSERLIS-RECURSION", label, scaled_diff(a, b), 1e-9));
        exact.push(a);
        sqrt.push(GaussianMeasureFD::centered(cov.clone())?.sqrt_cov());
    }

    let cfg = opts.mc(Suite::Isserlis.stream());
    let reports = estimate_many(MAX_DIM, INSTANCES, &cfg, |xi, o| {
        let mut x = [0.0; MAX_DIM];
        for (k, ((_, idx), root)) in instances.iter().zip(&sqrt).enumerate() {
            let n = root.len();
            for i in 0..n {
                x[i] = (0..n).map(|j| root[i][j] * xi[j]).sum();
            }
            o[k] = idx.iter().map(|&i| x[i]).product();
        }
        true
    })?;
    for (k, (r, &e)) in reports.iter().zip(&exact).enumerate() {
        out.push(mc_record("ISSERLIS-MC", format!("#{k}"), e, r, &cfg));
    }
    Ok(out)
}

fn mc_record(identity: &str, instance: String, exact: f64, r: &crate::mc::EstimateReport, cfg: &McConfig) -> Record {
    let z = z_test_compare(exact, r, cfg);
    let tol = cfg.confidence_multiplier * r.std_error;
    let mut rec = Record::new(identity, instance, (exact - r.mean).abs(), tol);
    rec.pass = z.pass;
    rec
}

fn hermite_suite() -> Result<Vec<Record>> {
    let table = HermiteTable::<f64>::new(25);
    let mut out = Vec::new();
    // n! H_n, lowest power first
    let closed: [&[f64]; 6] = [
        &[1.0],
        &[0.0, 1.0],
        &[-1.0, 0.0, 1.0],
        &[0.0, -3.0, 0.0, 1.0],
        &[3.0, 0.0, -6.0, 0.0, 1.0],
        &[0.0, 15.0, 0.0, -10.0, 0.0, 1.0],
    ];
    for (n, want) in closed.iter().enumerate() {
        let got = table.monomial_coeffs(n)?;
        let nf: f64 = factorial(n as u32);
        let r = if got.len() == want.len() {
            got.iter().zip(*want).fold(0.0f64, |m, (g, w)| m.max((g * nf - w).abs()))
        } else {
            f64::INFINITY
        };
        out.push(Record::new("HERMITE-CLOSED-FORM", format!("n={n}"), r, 1e-12));
    }

    for n in 1..=20 {
        let h = table.monomial_coeffs(n)?;
        let lower = table.monomial_coeffs(n - 1)?;
        let r = (1..h.len()).fold(0.0f64, |m, k| m.max((h[k] * k as f64 - lower[k - 1]).abs()));
        out.push(Record::new("HERMITE-DERIVATIVE", format!("n={n}"), r, 1e-12));
    }

    // E[H_n H_m] by a 16-point Gauss rule, exact up to degree 31
    let (nodes, weights) = gauss_hermite(16)?;
    for n in 0..=12 {
        let mut r = 0.0f64;
        for m in 0..=12 {
            let mut got = 0.0;
            for (&x, &w) in nodes.iter().zip(&weights) {
                got += w * table.eval(n, x)? * table.eval(m, x)?;
            }
            let want = if n == m { 1.0 / factorial::<f64>(n as u32) } else { 0.0 };
            r = r.max((got - want).abs());
        }
        out.push(Record::new("HERMITE-ORTHOGONALITY", format!("n={n} m=0..12"), r, 1e-9));
    }

    for ti in -4..=4 {
        let t = ti as f64 * 0.25;
        let mut r = 0.0f64;
        for xi in -6..=6 {
            let x = xi as f64 * 0.5;
            let got = table.generating_partial_sum(t, x, 25)?;
            r = r.max((got - (t * x - t * t / 2.0).exp()).abs());
        }
        out.push(Record::new("HERMITE-GENERATING", format!("t={t} x=-3..3 N=25"), r, 1e-8));
    }
    Ok(out)
}

fn chaos_suite(opts: &VerifyOptions) -> Result<Vec<Record>> {
    let mut rng = opts.rng(Suite::Chaos);
    let mut out = Vec::new();
    for k in 0..500 {
        let d = rng.random_range(1..=4);
        let f = random_poly(&mut rng, d, 6, 8);
        let g = random_poly(&mut rng, d, 6, 8);
        let label = format!("#{k} d={d} deg={}", f.degree());
        let c = poly_to_chaos(&f);
        let second = expectation_exact(&(&f * &f));
        out.push(Record::new("CHAOS-PARSEVAL", label.clone(), scaled_diff(second, c.norm_sq()), 1e-9));
        let back = chaos_to_poly(&c);
        let rt = back.max_abs_diff(&f) / 1f64.max(f.max_abs_coeff());
        out.push(Record::new("CHAOS-ROUND-TRIP", label.clone(), rt, 1e-9));
        let orders: f64 = c.chaos_norms_sq().values().sum();
        out.push(Record::new("CHAOS-ORDER-SUM", label.clone(), scaled_diff(orders, c.norm_sq()), 1e-9));
        let a = l2_inner(&f, &g)?;
        let b = l2_inner_chaos(&f, &g)?;
        out.push(Record::new("CHAOS-L2-DUAL", label, scaled_diff(a, b), 1e-9));
    }
    Ok(out)
}

fn operators_suite(opts: &VerifyOptions) -> Result<Vec<Record>> {
    let mut rng = opts.rng(Suite::Operators);
    let mut out = Vec::new();
    for id in IdentityId::ALL {
        for k in 0..200 {
            let d = rng.random_range(1..=4);
            let input = match id {
                IdentityId::Ibp => IdentityInput::Ibp {
                    f: random_poly(&mut rng, d, 4, 6),
                    h: random_hvec(&mut rng, d),
                },
                IdentityId::IbpProduct => IdentityInput::IbpProduct {
                    f: random_poly(&mut rng, d, 3, 5),
                    g: random_poly(&mut rng, d, 3, 5),
                    h: random_hvec(&mut rng, d),
                },
                IdentityId::Duality => IdentityInput::Duality {
                    f: random_poly(&mut rng, d, 4, 6),
                    u: random_field(&mut rng, d, 3),
                },
                IdentityId::Commute => IdentityInput::Commute {
                    u: random_field(&mut rng, d, 4),
                    h: random_hvec(&mut rng, d),
                },
                IdentityId::Energy => IdentityInput::Energy {
                    u: random_field(&mut rng, d, 3),
                    v: random_field(&mut rng, d, 3),
                },
                IdentityId::DeltaDL => IdentityInput::DeltaDL {
                    f: random_poly(&mut rng, d, 4, 6),
                },
                IdentityId::LSecondOrder => IdentityInput::LSecondOrder {
                    f: random_poly(&mut rng, d, 4, 6),
                },
                IdentityId::TraceForm => IdentityInput::TraceForm {
                    u: random_field(&mut rng, d, 3),
                    v: random_field(&mut rng, d, 3),
                },
                IdentityId::LEigen => {
                    let dense: Vec<u32> = (0..d).map(|_| rng.random_range(0..=3)).collect();
                    IdentityInput::LEigen {
                        dim: d,
                        alpha: MultiIndex::from_dense(&dense),
                    }
                }
                IdentityId::CauchyNorm => IdentityInput::CauchyNorm {
                    f: random_poly(&mut rng, d, 4, 6),
                },
            };
            let r = identity_residual(id, &input)?;
            out.push(Record::new(id.name(), format!("#{k} d={d}"), r, 1e-9));
        }
    }
    Ok(out)
}

fn semigroup_suite(opts: &VerifyOptions) -> Result<Vec<Record>> {
    let mut rng = opts.rng(Suite::Semigroup);
    let mut out = Vec::new();
    let gen = |rng: &mut ChaCha8Rng| {
        let d = rng.random_range(1..=3);
        // a first-order term keeps the generator quotient away from 0/0
        random_poly(rng, d, 5, 6).axpy(1.0, &PolyFunctional::variable(d, 0))
    };
    type Semigroup = fn(&Poly, f64) -> crate::chaos::ChaosExpansion<f64>;
    type Generator = fn(&Poly) -> crate::chaos::ChaosExpansion<f64>;
    type Family = (&'static str, Semigroup, Generator, fn(usize, f64) -> f64);
    let families: [Family; 2] = [
        ("OU", ou_semigroup, ou_generator, |n, t| (-(n as f64) * t).exp()),
        ("CAUCHY", cauchy_semigroup, cauchy_generator, |n, t| (-(n as f64).sqrt() * t).exp()),
    ];
    for (name, semigroup, generator, multiplier) in families {
        for k in 0..10 {
            let f = gen(&mut rng);
            let c = poly_to_chaos(&f);
            let t0 = semigroup(&f, 0.0);
            out.push(Record::new(format!("{name}-IDENTITY-AT-ZERO"), format!("#{k}"), t0.max_abs_diff(&c), 0.0));
        }
        for k in 0..50 {
            let f = gen(&mut rng);
            let t = rng.random_range(0.0..2.0);
            let s = rng.random_range(0.0..2.0);
            let ts = spectral_apply_chaos(&semigroup(&f, s), |n| multiplier(n, t));
            let r = ts.max_abs_diff(&semigroup(&f, t + s));
            out.push(Record::new(format!("{name}-SEMIGROUP"), format!("#{k} t={t:.6} s={s:.6}"), r, 1e-12));
        }
        for k in 0..10 {
            let f = gen(&mut rng);
            let norm = poly_to_chaos(&f).norm_sq();
            for t in [0.0, 0.001, 0.1, 0.5, 1.0, 3.0] {
                let excess = (semigroup(&f, t).norm_sq() - norm).max(0.0);
                out.push(Record::new(format!("{name}-CONTRACTION"), format!("#{k} t={t}"), excess, 0.0));
            }
        }
        for k in 0..10 {
            let f = gen(&mut rng);
            let c = poly_to_chaos(&f);
            let l = generator(&f);
            let err = |t: f64| semigroup(&f, t).axpy(-1.0, &c).scale(1.0 / t).max_abs_diff(&l);
            let ratio = err(1e-3) / err(1e-4);
            out.push(Record::new(
                format!("{name}-GENERATOR-RATE"),
                format!("#{k} ratio={ratio:.6}"),
                (ratio - 10.0).abs(),
                2.0,
            ));
        }
    }
    Ok(out)
}

fn sobolev_suite(opts: &VerifyOptions) -> Result<Vec<Record>> {
    let mut rng = opts.rng(Suite::Sobolev);
    let mut out = Vec::new();
    for k in 0..100 {
        let d = rng.random_range(1..=3);
        let f = random_poly(&mut rng, d, 5, 6);
        let chaos = sobolev_norm_sq(&f, 3);
        let direct = sobolev_norm_sq_direct(&f, 3)?;
        for (order, (a, b)) in chaos.iter().zip(&direct).enumerate() {
            out.push(Record::new(
                "SOBOLEV-CHAOS-VS-TENSOR",
                format!("#{k} d={d} k={order}"),
                scaled_diff(*a, *b),
                1e-9,
            ));
        }
    }
    Ok(out)
}

fn random_process(rng: &mut ChaCha8Rng, grid: TimeGrid, adapted: bool) -> Result<StepProcess<f64>> {
    let n = grid.n_cells();
    let values = (0..n)
        .map(|c| {
            let coords: Vec<usize> = if adapted { (0..c).collect() } else { (0..n).collect() };
            random_poly_on(rng, n, &coords, 3, 4)
        })
        .collect();
    StepProcess::new(grid, values)
}

fn skorokhod_suite(opts: &VerifyOptions) -> Result<Vec<Record>> {
    let mut rng = opts.rng(Suite::Skorokhod);
    let mut out = Vec::new();
    for k in 0..100 {
        let grid = TimeGrid::new(rng.random_range(1..=8))?;
        let label = format!("#{k} cells={}", grid.n_cells());
        let u = random_process(&mut rng, grid, true)?;
        let v = random_process(&mut rng, grid, true)?;
        let r = skorokhod_integral(&u).max_abs_diff(&ito_integral(&u)?);
        out.push(Record::new("SKOROKHOD-EQUALS-ITO", label.clone(), r, 1e-9));
        let iso = extended_isometry(&u, &v)?;
        out.push(Record::new("ISOMETRY-ADAPTED", label.clone(), iso.residual(), 1e-9));
        out.push(Record::new("ADAPTED-CORRECTION-ZERO", label.clone(), iso.correction.abs(), 0.0));

        let a = random_process(&mut rng, grid, false)?;
        let b = random_process(&mut rng, grid, false)?;
        let iso = extended_isometry(&a, &b)?;
        out.push(Record::new("ISOMETRY-ANTICIPATING", label.clone(), iso.residual(), 1e-9));
        let mut r = 0.0f64;
        for cell in 0..grid.n_cells() {
            r = r.max(derivative_of_skorokhod_residual(&a, cell)?);
        }
        out.push(Record::new("DERIVATIVE-OF-SKOROKHOD", label, r, 1e-9));
    }
    Ok(out)
}

fn normal_pdf(x: f64, sigma: f64) -> f64 {
    (-(x * x) / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
}

fn density_suite(opts: &VerifyOptions) -> Result<Vec<Record>> {
    let mut rng = opts.rng(Suite::Density);
    let mut out = Vec::new();
    let d = 3;
    let xs: Vec<f64> = (0..11).map(|i| -3.0 + 0.6 * i as f64).collect();
    for (j, norm) in [1.0, 2.0].into_iter().enumerate() {
        let dir = random_hvec(&mut rng, d);
        let h = dir.combine(norm / dir.norm(), &dir, 0.0);
        let f = isonormal_map(&h);
        let cfg = opts.mc(Suite::Density.stream() * 16 + j as u64);
        let est = density_estimate(&f, &xs, &cfg)?;
        for p in &est.points {
            let exact = normal_pdf(p.x, norm);
            let label = format!("|h|={norm} x={:.1}", p.x);
            let mut rec = Record::new("DENSITY-NORMAL", label.clone(), (p.p_hat - exact).abs(), 4.0 * p.se);
            rec.pass = (p.p_hat - exact).abs() <= cfg.confidence_multiplier * p.se;
            out.push(rec);
            out.push(Record::new("DENSITY-NONNEGATIVE", label, (-p.p_hat).max(0.0), 2.0 * p.se));
        }
        out.push(Record::new(
            "DENSITY-REJECTION",
            format!("|h|={norm} kurtosis={:.4}", est.weight_kurtosis),
            est.rejection_fraction,
            0.0,
        ));
    }

    // total mass on [-8, 8] by the trapezoid rule; the SE bound adds the
    // pointwise errors, which ignores their (positive) correlation only in
    // the conservative direction
    let grid: Vec<f64> = (0..=32).map(|i| -8.0 + 0.5 * i as f64).collect();
    let f = PolyFunctional::variable(1, 0);
    let cfg = opts.mc(Suite::Density.stream() * 16 + 2);
    let est = density_estimate(&f, &grid, &cfg)?;
    let w = |i: usize| if i == 0 || i == grid.len() - 1 { 0.25 } else { 0.5 };
    let mass: f64 = est.points.iter().enumerate().map(|(i, p)| w(i) * p.p_hat).sum();
    let se: f64 = est.points.iter().enumerate().map(|(i, p)| w(i) * p.se).sum();
    out.push(Record::new(
        "DENSITY-MASS",
        format!("F=xi1 grid=[-8,8] step=0.5 mass={mass:.6}"),
        (mass - 1.0).abs(),
        cfg.confidence_multiplier * se + 1e-6,
    ));

    // symbolic weight against a central finite-difference divergence
    let step = 1e-5;
    for k in 0..100 {
        let dd = rng.random_range(1..=2);
        let f = random_poly(&mut rng, dd, 3, 4).axpy(1.0, &PolyFunctional::variable(dd, 0));
        let weight = shift_weight(&f)?;
        let x: Vec<f64> = (0..dd).map(|_| rng.random_range(-2.0..2.0)).collect();
        let label = format!("#{k} d={dd}");
        let Some(w) = weight.eval(&x, 0.1) else {
            out.push(Record::new("DENSITY-WEIGHT-FD", label + " skipped: small gradient", 0.0, 1e-5));
            continue;
        };
        let u = |y: &[f64], i: usize| weight.field_at(y, SINGULAR_EPS).map(|v| v[i]).unwrap_or(f64::NAN);
        let mut fd = 0.0;
        for i in 0..dd {
            let mut plus = x.clone();
            let mut minus = x.clone();
            plus[i] += step;
            minus[i] -= step;
            fd += u(&x, i) * x[i] - (u(&plus, i) - u(&minus, i)) / (2.0 * step);
        }
        out.push(Record::new("DENSITY-WEIGHT-FD", label, scaled_diff(w, fd), 1e-5));
    }
    Ok(out)
}

fn cameron_martin_suite(opts: &VerifyOptions) -> Result<Vec<Record>> {
    let mut rng = opts.rng(Suite::CameronMartin);
    let mut out = Vec::new();
    for k in 0..100 {
        let m = rng.random_range(1..=5);
        let g = GaussianMeasureFD::centered(random_cov(&mut rng, m, 0.25))?;
        let f = random_poly(&mut rng, m, 4, 6);
        let z = random_vec(&mut rng, m);
        let h = g.cameron_martin_from_preimage(&z)?;
        let label = format!("#{k} m={m}");
        let (lhs, rhs) = g.change_of_variables(&f, &h)?;
        out.push(Record::new("CM-CHANGE-OF-VARIABLES", label.clone(), scaled_diff(lhs, rhs), 1e-9));
        let x = random_vec(&mut rng, m);
        let (composed, norms) = g.gradient_relation_residuals(&f, &x)?;
        let scale = 1f64.max(g.gradients(&f, &x)?.grad_h.iter().fold(0.0f64, |a, b| a.max(b.abs())));
        out.push(Record::new("CM-GRADIENT-RELATION", label.clone(), composed / scale, 1e-12));
        out.push(Record::new("CM-GRADIENT-NORM", label.clone(), norms / scale, 1e-12));
        out.push(Record::new("GAUSSIAN-IBP", label.clone(), g.gaussian_ibp_residual(&f, &z)?, 1e-9));
        let a = g.hhat_eval(&h, &x)?;
        let b = g.white_noise_eval(&z, &x)?;
        out.push(Record::new("HHAT-EQUALS-WHITE-NOISE", label, (a - b).abs(), 1e-10));
    }

    // Monte Carlo checks on a fixed random measure
    let m = 4;
    let g = GaussianMeasureFD::centered(random_cov(&mut rng, m, 0.25))?;
    let zs: Vec<Vec<f64>> = (0..20).map(|_| random_vec(&mut rng, m)).collect();
    let inv = g.inv_sqrt_cov();
    let ws: Vec<Vec<f64>> = zs
        .iter()
        .map(|z| (0..m).map(|j| (0..m).map(|i| inv[i][j] * z[i]).sum()).collect())
        .collect();
    let cfg = opts.mc(Suite::CameronMartin.stream() * 16);
    let reports = estimate_many(m, ws.len(), &cfg, |xi, o| {
        let mut x = [0.0; 4];
        g.transform(xi, &mut x);
        for (oi, w) in o.iter_mut().zip(&ws) {
            let v: f64 = w.iter().zip(&x).map(|(a, b)| a * b).sum();
            *oi = v * v;
        }
        true
    })?;
    for (k, (r, z)) in reports.iter().zip(&zs).enumerate() {
        let norm_sq: f64 = z.iter().map(|c| c * c).sum();
        out.push(mc_record("WHITE-NOISE-ISOMETRY-MC", format!("#{k}"), norm_sq, r, &cfg));
    }

    for k in 0..5 {
        let z = random_vec(&mut rng, m);
        let h = g.cameron_martin_from_preimage(&z)?;
        let c = random_vec(&mut rng, m);
        let test = |x: &[f64]| c.iter().zip(x).map(|(a, b)| a * b).sum::<f64>().cos();
        let cfg = opts.mc(Suite::CameronMartin.stream() * 16 + 1 + k);
        let r = estimate_expectation(m, &cfg, |xi| {
            let mut x = [0.0; 4];
            g.transform(xi, &mut x);
            let shifted: Vec<f64> = x.iter().zip(&h.h).map(|(a, b)| a + b).collect();
            test(&shifted) - test(&x) * g.cm_density(&h, &x).expect("nondegenerate")
        })?;
        out.push(mc_record("CM-SHIFT-MC", format!("#{k} g=cos(<c,x>)"), 0.0, &r, &cfg));

        let f = random_vec(&mut rng, m);
        let exact = g.char_function(&f)?;
        let (re, im) = g.char_function_mc(&f, &cfg)?;
        out.push(mc_record("CHAR-FUNCTION-MC-RE", format!("#{k}"), exact.re, &re, &cfg));
        out.push(mc_record("CHAR-FUNCTION-MC-IM", format!("#{k}"), exact.im, &im, &cfg));
    }
    Ok(out)
}

fn mc_suite(opts: &VerifyOptions) -> Result<Vec<Record>> {
    let mut out = Vec::new();
    let d = 3;
    let cfg = opts.mc(Suite::Mc.stream() * 16);
    let n = cfg.n_samples as f64;
    let moments = estimate_many(d, 2 * d + 2, &cfg, |x, o| {
        for i in 0..d {
            o[i] = x[i];
            o[d + i] = x[i] * x[i];
        }
        o[2 * d] = x[0].powi(4);
        o[2 * d + 1] = 3.0;
        true
    })?;
    for i in 0..d {
        out.push(Record::new("MC-MEAN", format!("coord={}", i + 1), moments[i].mean.abs(), 4.0 / n.sqrt()));
        let var = moments[d + i].mean - moments[i].mean.powi(2);
        out.push(Record::new("MC-VARIANCE", format!("coord={}", i + 1), (var - 1.0).abs(), 4.0 * (2.0 / n).sqrt()));
    }
    out.push(mc_record("MC-FOURTH-MOMENT", "x1^4".into(), 3.0, &moments[2 * d], &cfg));
    let c = moments[2 * d + 1];
    out.push(Record::new("MC-CONSTANT", "eval=3", (c.mean - 3.0).abs() + c.std_error, 0.0));

    let again = estimate_many(d, 2 * d + 2, &cfg, |x, o| {
        for i in 0..d {
            o[i] = x[i];
            o[d + i] = x[i] * x[i];
        }
        o[2 * d] = x[0].powi(4);
        o[2 * d + 1] = 3.0;
        true
    })?;
    let same = if again == moments { 0.0 } else { 1.0 };
    out.push(Record::new("MC-REPRODUCIBLE", "same config twice", same, 0.0));

    let small = McConfig { n_samples: 100_000.min(cfg.n_samples), ..cfg };
    let eval = |x: &[f64], o: &mut [f64]| {
        o[0] = x[0];
        o[1] = (x[0] * x[1]).sin();
        o[2] = x[2].powi(3) - x[1];
        true
    };
    let base = estimate_many(d, 3, &small.with_workers(1), eval)?;
    for w in [2, 3, 4] {
        let other = estimate_many(d, 3, &small.with_workers(w), eval)?;
        let diff = base
            .iter()
            .zip(&other)
            .fold(0.0f64, |m, (a, b)| m.max((a.mean - b.mean).abs()).max((a.std_error - b.std_error).abs()));
        out.push(Record::new("MC-WORKER-INVARIANCE", format!("workers=1 vs {w}"), diff, 1e-12));
    }

    let mut failures = 0;
    for s in 0..200u64 {
        let c = McConfig {
            n_samples: 1000,
            seed: cfg.seed.wrapping_add(1 + s),
            ..cfg
        };
        let r = estimate_expectation(1, &c, |x| x[0])?;
        if !z_test_compare(0.0, &r, &c).pass {
            failures += 1;
        }
    }
    out.push(Record::new("MC-CALIBRATION", "200 seeds, eval=x1", failures as f64, 2.0));
    Ok(out)
}
