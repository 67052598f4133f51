//! Problem-spec files: TOML schema, parsing, and conversion into core
//! objects. Unknown keys are rejected everywhere so a typo cannot silently
//! drop a constraint. Exact numbers are written as rational strings
//! ("17/10", "-3", "1/3"); sample data and prior weights are plain floats.

use std::fs;
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Deserialize;

use motkit::{make_pmf, Alphabet, BallConvention, NType, Pmf, PriorAtom, PriorSpec, SetExpr};

use crate::CliError;

/// Top-level spec file. Every section is optional in the schema; each
/// subcommand validates the sections it needs.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    /// Free-form description, echoed in text output.
    pub title: Option<String>,
    pub alphabet: Option<AlphabetSection>,
    pub observed: Option<ObservedSection>,
    pub source: Option<SourceSection>,
    pub schedule: Option<ScheduleSection>,
    pub prior: Option<PriorSection>,
    pub sets: Option<SetsSection>,
    pub ball: Option<BallSection>,
    pub quantize: Option<QuantizeSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphabetSection {
    pub letters: Option<Vec<String>>,
    /// Rational letter values, used by the mean-* set kinds. Defaults to
    /// 1..=m when absent.
    pub values: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservedSection {
    /// Counts of the base observed type; the base sample size is their sum.
    pub counts: Vec<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSection {
    /// Generating pmf for type-side runs, as rational strings.
    pub pmf: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    /// "static" (default) scales the observed counts; "dynamic" rounds the
    /// target pmf at each n.
    pub kind: Option<ScheduleKind>,
    pub ns: Vec<u64>,
    /// Dynamic target pmf, rational strings.
    pub target: Option<Vec<String>>,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    Static,
    Dynamic,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorSection {
    pub kind: PriorKind,
    pub atoms: Option<Vec<AtomSection>>,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum PriorKind {
    Uniform,
    Atoms,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSection {
    pub counts: Vec<u64>,
    pub den: u64,
    pub weight: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetsSection {
    /// The conditioning set: table1, project, map, and enumerate work
    /// inside it; sanov --side sources uses it as the event when no
    /// explicit event is given; sanov --side types treats it as the rare
    /// set.
    pub conditioning: Option<SetSpec>,
    /// Explicit event set for sanov --side sources.
    pub event: Option<SetSpec>,
    /// Outer conditioning for sanov --side sources (default: the simplex).
    pub outer: Option<SetSpec>,
}

/// Set expressions, tagged by `kind`.
#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SetSpec {
    Simplex,
    /// `sum q_i * value_i = target` over the alphabet values.
    MeanEq { target: String },
    MeanGe { target: String },
    MeanLe { target: String },
    LinearEq { coeffs: Vec<String>, target: String },
    LinearGe { coeffs: Vec<String>, target: String },
    Ball { center: Vec<String>, radius: String },
    Complement { child: Box<SetSpec> },
    Intersection { children: Vec<SetSpec> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallSection {
    /// Radius as a rational string; the convention comes from --ball. The
    /// center is always the projection the subcommand concentrates on.
    pub radius: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantizeSection {
    /// Strictly increasing cell boundaries, rational strings.
    pub cuts: Vec<String>,
    pub labels: Option<Vec<String>>,
    pub samples: Vec<f64>,
}

/// Parse "a/b" or "a" into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational, CliError> {
    let bad = || CliError::validation(format!("not a rational number: {s:?} (use \"a\" or \"a/b\")"));
    let mut parts = s.splitn(2, '/');
    let num: BigInt = parts.next().unwrap().trim().parse().map_err(|_| bad())?;
    let den: BigInt = match parts.next() {
        Some(d) => d.trim().parse().map_err(|_| bad())?,
        None => BigInt::from(1),
    };
    if den == BigInt::from(0) {
        return Err(CliError::validation(format!("zero denominator in {s:?}")));
    }
    Ok(BigRational::new(num, den))
}

fn parse_rationals(v: &[String]) -> Result<Vec<BigRational>, CliError> {
    v.iter().map(|s| parse_rational(s)).collect()
}

/// Rational-string pmf to floats, validated and tolerant of float rounding.
fn parse_pmf(v: &[String]) -> Result<Pmf, CliError> {
    let rats = parse_rationals(v)?;
    let weights: Vec<f64> = rats
        .iter()
        .map(|r| r.to_f64().ok_or_else(|| CliError::validation("pmf weight overflows f64".into())))
        .collect::<Result<_, _>>()?;
    Ok(make_pmf(&weights, 1e-9)?)
}

/// A spec file loaded and pre-validated up to alphabet size `m`.
pub struct Problem {
    pub spec: SpecFile,
    /// Alphabet size, inferred from whichever section fixes it first.
    pub m: usize,
    /// Letter values for mean constraints (default 1..=m).
    pub values: Vec<BigRational>,
}

impl Problem {
    pub fn load(path: &Path) -> Result<Problem, CliError> {
        let text = fs::read_to_string(path).map_err(|e| {
            CliError::validation(format!("cannot read spec {}: {e}", path.display()))
        })?;
        let spec: SpecFile = toml::from_str(&text)
            .map_err(|e| CliError::validation(format!("bad spec {}: {e}", path.display())))?;
        Self::from_spec(spec)
    }

    fn from_spec(spec: SpecFile) -> Result<Problem, CliError> {
        // The alphabet size must be pinned by some section.
        let m = if let Some(a) = spec.alphabet.as_ref().and_then(|a| a.values.as_ref()) {
            a.len()
        } else if let Some(a) = spec.alphabet.as_ref().and_then(|a| a.letters.as_ref()) {
            a.len()
        } else if let Some(o) = spec.observed.as_ref() {
            o.counts.len()
        } else if let Some(s) = spec.source.as_ref() {
            s.pmf.len()
        } else if let Some(t) = spec.schedule.as_ref().and_then(|s| s.target.as_ref()) {
            t.len()
        } else if let Some(q) = spec.quantize.as_ref() {
            q.cuts.len() + 1
        } else {
            return Err(CliError::validation(
                "spec fixes no alphabet size: add [alphabet], [observed], or [source]".into(),
            ));
        };
        let values = match spec.alphabet.as_ref().and_then(|a| a.values.as_ref()) {
            Some(v) => {
                if v.len() != m {
                    return Err(CliError::validation(format!(
                        "alphabet values: expected {m} entries, got {}",
                        v.len()
                    )));
                }
                parse_rationals(v)?
            }
            None => (1..=m as i64).map(|v| BigRational::from_integer(BigInt::from(v))).collect(),
        };
        let letters = match spec.alphabet.as_ref().and_then(|a| a.letters.as_ref()) {
            Some(l) => l.clone(),
            None => (1..=m).map(|i| i.to_string()).collect(),
        };
        // Constructed for its validation (letter count, duplicates).
        Alphabet::new(letters, Some(values.clone()))?;
        Ok(Problem { spec, m, values })
    }

    pub fn observed(&self) -> Result<NType, CliError> {
        let section = self
            .spec
            .observed
            .as_ref()
            .ok_or_else(|| CliError::validation("this subcommand needs [observed]".into()))?;
        Ok(NType::from_counts(section.counts.clone())?)
    }

    pub fn source(&self) -> Result<Pmf, CliError> {
        let section = self
            .spec
            .source
            .as_ref()
            .ok_or_else(|| CliError::validation("this subcommand needs [source]".into()))?;
        parse_pmf(&section.pmf)
    }

    pub fn schedule_kind(&self) -> ScheduleKind {
        self.spec
            .schedule
            .as_ref()
            .and_then(|s| s.kind)
            .unwrap_or(ScheduleKind::Static)
    }

    pub fn schedule_ns(&self) -> Result<&[u64], CliError> {
        let section = self
            .spec
            .schedule
            .as_ref()
            .ok_or_else(|| CliError::validation("this subcommand needs [schedule]".into()))?;
        if section.ns.is_empty() {
            return Err(CliError::validation("[schedule] ns must be non-empty".into()));
        }
        Ok(&section.ns)
    }

    /// The schedule restricted to a single sample size (the CLI runs the
    /// scheduled entries independently so they can go in parallel).
    pub fn schedule_at(&self, n: u64) -> Result<motkit::TypeSchedule, CliError> {
        let section = self.spec.schedule.as_ref().expect("checked by schedule_ns");
        match section.kind.unwrap_or(ScheduleKind::Static) {
            ScheduleKind::Static => {
                if section.target.is_some() {
                    return Err(CliError::validation(
                        "a static schedule takes no target (it scales [observed])".into(),
                    ));
                }
                Ok(motkit::TypeSchedule::Static { base: self.observed()?, ns: vec![n] })
            }
            ScheduleKind::Dynamic => {
                let target = section.target.as_ref().ok_or_else(|| {
                    CliError::validation("a dynamic schedule needs target = [pmf]".into())
                })?;
                Ok(motkit::TypeSchedule::Dynamic { target: parse_pmf(target)?, ns: vec![n] })
            }
        }
    }

    pub fn prior(&self) -> Result<PriorSpec, CliError> {
        let Some(section) = self.spec.prior.as_ref() else {
            return Ok(PriorSpec::Uniform);
        };
        match section.kind {
            PriorKind::Uniform => {
                if section.atoms.is_some() {
                    return Err(CliError::validation("a uniform prior takes no atoms".into()));
                }
                Ok(PriorSpec::Uniform)
            }
            PriorKind::Atoms => {
                let atoms = section.atoms.as_ref().ok_or_else(|| {
                    CliError::validation("an atom prior needs [[prior.atoms]]".into())
                })?;
                let atoms = atoms
                    .iter()
                    .map(|a| PriorAtom::new(a.counts.clone(), a.den, a.weight))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(PriorSpec::atoms(atoms)?)
            }
        }
    }

    pub fn conditioning(&self, conv: BallConvention) -> Result<SetExpr, CliError> {
        match self.spec.sets.as_ref().and_then(|s| s.conditioning.as_ref()) {
            Some(spec) => self.set_expr(spec, conv),
            None => Ok(SetExpr::simplex()),
        }
    }

    /// Event set for decay runs: explicit [sets.event], else the
    /// conditioning set itself measured against [sets.outer] or the simplex.
    pub fn event_and_outer(&self, conv: BallConvention) -> Result<(SetExpr, SetExpr), CliError> {
        let sets = self.spec.sets.as_ref();
        let event = match sets.and_then(|s| s.event.as_ref()) {
            Some(spec) => self.set_expr(spec, conv)?,
            None => self.conditioning(conv)?,
        };
        let outer = match sets.and_then(|s| s.outer.as_ref()) {
            Some(spec) => self.set_expr(spec, conv)?,
            None => SetExpr::simplex(),
        };
        Ok((event, outer))
    }

    pub fn ball_radius(&self) -> Result<f64, CliError> {
        let section = self
            .spec
            .ball
            .as_ref()
            .ok_or_else(|| CliError::validation("this subcommand needs [ball]".into()))?;
        let radius = parse_rational(&section.radius)?
            .to_f64()
            .ok_or_else(|| CliError::validation("ball radius overflows f64".into()))?;
        if !(radius > 0.0) {
            return Err(CliError::validation("ball radius must be positive".into()));
        }
        Ok(radius)
    }

    pub fn partition(&self) -> Result<(motkit::PartitionSpec, &[f64]), CliError> {
        let section = self
            .spec
            .quantize
            .as_ref()
            .ok_or_else(|| CliError::validation("this subcommand needs [quantize]".into()))?;
        let cuts = parse_rationals(&section.cuts)?;
        let mut partition = motkit::PartitionSpec::intervals(cuts)?;
        if let Some(labels) = section.labels.as_ref() {
            partition = partition.with_labels(labels.clone())?;
        }
        Ok((partition, &section.samples))
    }

    /// Materialize a set expression against this problem's alphabet.
    pub fn set_expr(&self, spec: &SetSpec, conv: BallConvention) -> Result<SetExpr, CliError> {
        let mean_row = |target: &String, flip: bool| -> Result<(Vec<BigRational>, BigRational), CliError> {
            let t = parse_rational(target)?;
            let coeffs = self
                .values
                .iter()
                .map(|v| if flip { -v.clone() } else { v.clone() })
                .collect();
            Ok((coeffs, if flip { -t } else { t }))
        };
        Ok(match spec {
            SetSpec::Simplex => SetExpr::simplex(),
            SetSpec::MeanEq { target } => {
                let (coeffs, target) = mean_row(target, false)?;
                SetExpr::LinearEq { coeffs, target }
            }
            SetSpec::MeanGe { target } => {
                let (coeffs, target) = mean_row(target, false)?;
                SetExpr::LinearGe { coeffs, target }
            }
            SetSpec::MeanLe { target } => {
                // mean <= t holds exactly when -mean >= -t.
                let (coeffs, target) = mean_row(target, true)?;
                SetExpr::LinearGe { coeffs, target }
            }
            SetSpec::LinearEq { coeffs, target } => SetExpr::LinearEq {
                coeffs: parse_rationals(coeffs)?,
                target: parse_rational(target)?,
            },
            SetSpec::LinearGe { coeffs, target } => SetExpr::LinearGe {
                coeffs: parse_rationals(coeffs)?,
                target: parse_rational(target)?,
            },
            SetSpec::Ball { center, radius } => {
                let radius = parse_rational(radius)?
                    .to_f64()
                    .ok_or_else(|| CliError::validation("ball radius overflows f64".into()))?;
                SetExpr::ball(parse_pmf(center)?, radius, conv)?
            }
            SetSpec::Complement { child } => {
                SetExpr::Complement(Box::new(self.set_expr(child, conv)?))
            }
            SetSpec::Intersection { children } => SetExpr::Intersection(
                children.iter().map(|c| self.set_expr(c, conv)).collect::<Result<_, _>>()?,
            ),
        })
    }
}
