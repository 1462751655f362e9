use std::path::{Path, PathBuf};

use carousel_cc::{binary_config, lagrange_config, polygon_config_with_mass, CentralConfiguration};
use carousel_core::Alpha;
use carousel_plan::{plan_from_eps, plan_rational, CarouselFamily, CarouselPlan};
use clap::Args;
use serde::Deserialize;

use crate::Failure;

pub fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    s.split(',').filter(|t| !t.trim().is_empty()).map(|t| t.trim().parse::<T>().map_err(|e| format!("{t:?}: {e}"))).collect()
}

pub fn parse_masses(s: &str) -> Result<Vec<f64>, String> {
    parse_list(s)
}

/// `a..b` or `a..=b`, both ends included.
pub fn parse_range(s: &str) -> Result<std::ops::RangeInclusive<usize>, String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected a..b, got {s:?}"))?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let lo: usize = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
    let hi: usize = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
    if lo > hi {
        return Err(format!("empty range {s}"));
    }
    Ok(lo..=hi)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

/// Configuration JSON without (or with a stale) residual.
#[derive(Deserialize)]
pub struct RawConfig {
    pub alpha: Alpha,
    pub masses: Vec<f64>,
    pub positions: Vec<[f64; 2]>,
}

pub fn read_config(path: &Path) -> Result<CentralConfiguration, Failure> {
    let raw: RawConfig = read_json(path)?;
    let mut cc = CentralConfiguration { alpha: raw.alpha, masses: raw.masses, positions: raw.positions, residual: 0.0 };
    cc.residual = cc.recompute_residual().map_err(|e| Failure::Input(e.to_string()))?;
    Ok(cc)
}

/// `lagrange:m1,m2,m3`, `polygon:k[:m]`, `binary:m1,m2` or `file:path`.
/// `total` fixes the total mass of a polygon when no per-body mass is given.
fn config_from_spec(spec: &str, alpha: Alpha, total: Option<f64>) -> Result<CentralConfiguration, Failure> {
    let (kind, rest) = spec.split_once(':').ok_or_else(|| Failure::Input(format!("bad configuration {spec:?}")))?;
    let bad = |e: String| Failure::Input(format!("{spec:?}: {e}"));
    let cc = match kind {
        "lagrange" => {
            let m = parse_masses(rest).map_err(bad)?;
            if m.len() != 3 {
                return Err(bad("need three masses".into()));
            }
            lagrange_config(m[0], m[1], m[2], alpha)
        }
        "binary" => {
            let m = parse_masses(rest).map_err(bad)?;
            if m.len() != 2 {
                return Err(bad("need two masses".into()));
            }
            binary_config(m[0], m[1], alpha)
        }
        "polygon" => {
            let mut parts = rest.split(':');
            let k: usize = parts.next().unwrap_or("").parse().map_err(|e| bad(format!("{e}")))?;
            let m = match (parts.next(), total) {
                (Some(m), _) => m.parse().map_err(|e| bad(format!("{e}")))?,
                (None, Some(t)) => t / k as f64,
                (None, None) => 1.0,
            };
            polygon_config_with_mass(k, alpha, m)
        }
        "file" => {
            let cc = read_config(Path::new(rest))?;
            if cc.alpha != alpha {
                return Err(bad(format!("file has alpha {} but {alpha} was requested", cc.alpha)));
            }
            Ok(cc)
        }
        other => return Err(bad(format!("unknown kind {other:?}"))),
    };
    cc.map_err(|e| Failure::Infeasible(e.to_string()))
}

#[derive(Args, Debug, Clone)]
pub struct FamilyArgs {
    /// Force exponent: decimal, num/den, `log` or `newton`.
    #[arg(long, default_value = "3/2")]
    pub alpha: Alpha,
    /// Base configuration: lagrange:m1,m2,m3 | polygon:k[:m] | binary:m1,m2 | file:PATH.
    #[arg(long, default_value = "lagrange:1,2,3")]
    pub a0: String,
    /// Cabled body, repeatable: BODY=binary:m1,m2 | BODY=polygon:k | BODY=file:PATH
    /// (0-based body of a0; a polygon takes the mass of the body it replaces).
    #[arg(long = "cable", default_value = "0=binary:0.5,0.5")]
    pub cables: Vec<String>,
    /// Full family JSON; overrides --a0 and --cable.
    #[arg(long)]
    pub family: Option<PathBuf>,
}

impl FamilyArgs {
    pub fn build(&self) -> Result<CarouselFamily, Failure> {
        if let Some(path) = &self.family {
            return read_json(path);
        }
        let a0 = config_from_spec(&self.a0, self.alpha, None)?;
        let mut cabled = Vec::new();
        for c in &self.cables {
            let (body, spec) = c.split_once('=').ok_or_else(|| Failure::Input(format!("bad --cable {c:?}")))?;
            let body: usize = body.trim().parse().map_err(|e| Failure::Input(format!("--cable {c:?}: {e}")))?;
            let mass = a0.masses.get(body).copied().ok_or_else(|| Failure::Input(format!("no body {body} in a0")))?;
            cabled.push((body, config_from_spec(spec, self.alpha, Some(mass))?));
        }
        let (fam, _) = CarouselFamily::cabling(&a0, cabled).map_err(|e| Failure::Infeasible(e.to_string()))?;
        Ok(fam)
    }
}

#[derive(Args, Debug, Clone)]
pub struct PlanArgs {
    /// Cluster integers p_j, comma separated.
    #[arg(long, default_value = "1", value_delimiter = ',', allow_hyphen_values = true)]
    pub p: Vec<i64>,
    /// Period denominator q (rational plans, nu = nu_p / q).
    #[arg(long, default_value_t = 1)]
    pub q: i64,
    /// Numerator of nu; the plan is periodic with period 2 pi q.
    #[arg(long, conflicts_with = "eps")]
    pub nu_p: Option<i64>,
    /// Small parameter; gives a quasi-periodic plan.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Cluster phases theta_j, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub phases: Option<Vec<f64>>,
}

impl PlanArgs {
    pub fn build(&self, alpha: Alpha) -> Result<CarouselPlan, Failure> {
        let plan = match (self.nu_p, self.eps) {
            (Some(p), _) => plan_rational(&self.p, p, self.q, alpha),
            (None, Some(e)) => plan_from_eps(&self.p, e, alpha),
            (None, None) => return Err(Failure::Input("give --nu-p (periodic) or --eps".into())),
        }
        .map_err(|e| Failure::Infeasible(e.to_string()))?;
        match &self.phases {
            Some(ph) => plan.with_phases(ph).map_err(|e| Failure::Input(e.to_string())),
            None => Ok(plan),
        }
    }
}

pub fn family_and_plan(f: &FamilyArgs, p: &PlanArgs) -> Result<(CarouselFamily, CarouselPlan), Failure> {
    let fam = f.build()?;
    let plan = p.build(fam.alpha())?;
    if plan.n0() != fam.n0() {
        return Err(Failure::Input(format!("{} values of p for {} cabled clusters", plan.n0(), fam.n0())));
    }
    Ok((fam, plan))
}
