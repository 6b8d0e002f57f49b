//! Region, sampler and decay-profile specifications accepted on the command
//! line (short strings) or in config files (JSON objects).

use std::path::PathBuf;

use fermi_ee::counterexample::{
    build_envelope, build_zigzag_region, sequence_from_envelope, DecayProfile, DecaySequence,
    DEFAULT_ENVELOPE_GRID,
};
use fermi_ee::regions::{icosphere, Region3D, Sampler, TriangleMesh};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

/// clap value parser: JSON when the text looks like JSON, a plain string
/// otherwise.
pub fn json_or_string(s: &str) -> Result<Value, String> {
    let t = s.trim();
    if t.starts_with('{') || t.starts_with('[') {
        serde_json::from_str(t).map_err(|e| format!("invalid JSON: {e}"))
    } else {
        Ok(Value::String(t.to_string()))
    }
}

/// clap value parser for `a,b`.
pub fn interval_pair(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(format!("expected 'left,right', got '{s}'"));
    }
    let a = parts[0].parse::<f64>().map_err(|_| format!("bad number '{}'", parts[0]))?;
    let b = parts[1].parse::<f64>().map_err(|_| format!("bad number '{}'", parts[1]))?;
    Ok([a, b])
}

fn zero3() -> [f64; 3] {
    [0.0; 3]
}
fn one() -> f64 {
    1.0
}
fn default_blocks() -> usize {
    32
}
fn default_t_max() -> f64 {
    1e5
}
fn default_subdivisions() -> u32 {
    5
}
fn default_profile() -> DecayProfile {
    DecayProfile::InverseLog
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionSpec {
    Box {
        min: [f64; 3],
        max: [f64; 3],
    },
    Ball {
        #[serde(default = "zero3")]
        center: [f64; 3],
        #[serde(default = "one")]
        radius: f64,
    },
    Cylinder {
        #[serde(default)]
        center: [f64; 2],
        #[serde(default = "one")]
        radius: f64,
        #[serde(default)]
        z_min: f64,
        #[serde(default = "one")]
        z_max: f64,
    },
    /// Zigzag prism from a decay profile, an explicit sequence, or a
    /// sequence CSV (`i,a,cumulative` with a `tail` row).
    Zigzag {
        #[serde(default = "default_profile")]
        profile: DecayProfile,
        #[serde(default = "default_blocks")]
        blocks: usize,
        #[serde(default = "default_t_max")]
        t_max: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sequence: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sequence_file: Option<PathBuf>,
    },
    Icosphere {
        #[serde(default = "zero3")]
        center: [f64; 3],
        #[serde(default = "one")]
        radius: f64,
        #[serde(default = "default_subdivisions")]
        subdivisions: u32,
    },
    Mesh {
        path: PathBuf,
    },
}

impl RegionSpec {
    /// Accepts `cube`, `ball`, `cylinder`, `zigzag[:N]`, `icosphere[:k]`,
    /// `mesh:PATH` or a JSON object.
    pub fn from_value(v: &Value) -> Result<Self, CliError> {
        match v {
            Value::String(s) => Self::parse_short(s),
            Value::Object(_) => {
                serde_json::from_value(v.clone()).map_err(|e| CliError::Usage(format!("region: {e}")))
            }
            _ => Err(CliError::Usage(format!("region: expected a string or object, got {v}"))),
        }
    }

    fn parse_short(s: &str) -> Result<Self, CliError> {
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let bad = || CliError::Usage(format!("region: unrecognized spec '{s}'"));
        let count = |a: Option<&str>| -> Result<Option<u64>, CliError> {
            a.map(|a| a.trim().parse::<u64>().map_err(|_| bad())).transpose()
        };
        Ok(match head {
            "cube" if arg.is_none() => RegionSpec::Box { min: [0.0; 3], max: [1.0; 3] },
            "ball" if arg.is_none() => RegionSpec::Ball { center: [0.0; 3], radius: 1.0 },
            "cylinder" if arg.is_none() => {
                RegionSpec::Cylinder { center: [0.0; 2], radius: 1.0, z_min: 0.0, z_max: 1.0 }
            }
            "zigzag" => RegionSpec::Zigzag {
                profile: default_profile(),
                blocks: count(arg)?.map_or(default_blocks(), |n| n as usize),
                t_max: default_t_max(),
                sequence: None,
                sequence_file: None,
            },
            "icosphere" => RegionSpec::Icosphere {
                center: [0.0; 3],
                radius: 1.0,
                subdivisions: count(arg)?.map_or(default_subdivisions(), |n| n as u32),
            },
            "mesh" => match arg {
                Some(p) if !p.is_empty() => RegionSpec::Mesh { path: PathBuf::from(p) },
                _ => return Err(bad()),
            },
            _ => return Err(bad()),
        })
    }

    pub fn build(&self) -> Result<Region3D, CliError> {
        Ok(match self {
            RegionSpec::Box { min, max } => Region3D::cuboid(*min, *max)?,
            RegionSpec::Ball { center, radius } => Region3D::ball(*center, *radius)?,
            RegionSpec::Cylinder { center, radius, z_min, z_max } => {
                Region3D::cylinder(*center, *radius, *z_min, *z_max)?
            }
            RegionSpec::Zigzag { .. } => build_zigzag_region(&self.zigzag_sequence()?.expect("zigzag"))?,
            RegionSpec::Icosphere { center, radius, subdivisions } => {
                Region3D::Mesh(icosphere(*center, *radius, *subdivisions)?)
            }
            RegionSpec::Mesh { path } => Region3D::Mesh(TriangleMesh::load(path)?),
        })
    }

    /// The block sequence of a zigzag spec.
    pub fn zigzag_sequence(&self) -> Result<Option<DecaySequence>, CliError> {
        let RegionSpec::Zigzag { profile, blocks, t_max, sequence, sequence_file } = self else {
            return Ok(None);
        };
        let seq = match (sequence, sequence_file) {
            (Some(_), Some(_)) => {
                return Err(CliError::Usage("region: give either 'sequence' or 'sequence_file', not both".into()))
            }
            (Some(a), None) => {
                let tail = 1.0 - a.iter().sum::<f64>();
                DecaySequence::new(a.clone(), if tail.abs() < 1e-12 { 0.0 } else { tail })?
            }
            (None, Some(path)) => read_sequence_csv(path)?,
            (None, None) => {
                let env = build_envelope(|t| profile.eval(t), *t_max, DEFAULT_ENVELOPE_GRID)?;
                sequence_from_envelope(&env, *blocks)?
            }
        };
        Ok(Some(seq))
    }

    /// Closed-form reference values for shapes that approximate one.
    pub fn analytic_sphere(&self) -> Option<f64> {
        match self {
            RegionSpec::Icosphere { radius, .. } => Some(*radius),
            _ => None,
        }
    }
}

#[derive(Debug, Deserialize)]
struct SequenceRow {
    i: String,
    a: f64,
}

pub fn read_sequence_csv(path: &std::path::Path) -> Result<DecaySequence, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| CliError::Usage(format!("sequence file {}: {e}", path.display())))?;
    let mut a = Vec::new();
    let mut tail = 0.0;
    for row in reader.deserialize::<SequenceRow>() {
        let row = row.map_err(|e| CliError::Usage(format!("sequence file {}: {e}", path.display())))?;
        if row.i.trim() == "tail" {
            tail = row.a;
        } else {
            a.push(row.a);
        }
    }
    Ok(DecaySequence::new(a, tail)?)
}

/// `grid:N`, `mc:SAMPLES` (seeded by `seed`) or a JSON sampler object.
pub fn parse_sampler(v: &Value, seed: u64) -> Result<Sampler, CliError> {
    match v {
        Value::String(s) => {
            let bad = || CliError::Usage(format!("sampler: expected 'grid:N' or 'mc:SAMPLES', got '{s}'"));
            let (kind, n) = s.split_once(':').ok_or_else(bad)?;
            let n: usize = n.trim().parse().map_err(|_| bad())?;
            match kind {
                "grid" => Ok(Sampler::Grid { n }),
                "mc" | "monte_carlo" => Ok(Sampler::MonteCarlo { samples: n, seed }),
                _ => Err(bad()),
            }
        }
        Value::Object(_) => serde_json::from_value(v.clone()).map_err(|e| CliError::Usage(format!("sampler: {e}"))),
        _ => Err(CliError::Usage(format!("sampler: expected a string or object, got {v}"))),
    }
}

/// `zero`, `inverse_log`, `power:P` or a JSON profile object.
pub fn parse_profile(v: &Value) -> Result<DecayProfile, CliError> {
    let profile = match v {
        Value::String(s) => {
            let bad = || CliError::Usage(format!("phi: unrecognized decay profile '{s}'"));
            match s.split_once(':') {
                None if s == "zero" => DecayProfile::Zero,
                None if s == "inverse_log" => DecayProfile::InverseLog,
                Some(("power", p)) => DecayProfile::Power { p: p.trim().parse().map_err(|_| bad())? },
                _ => return Err(bad()),
            }
        }
        Value::Object(_) => serde_json::from_value(v.clone()).map_err(|e| CliError::Usage(format!("phi: {e}")))?,
        _ => return Err(CliError::Usage(format!("phi: expected a string or object, got {v}"))),
    };
    if let DecayProfile::Power { p } = profile {
        if !(p > 0.0) || !p.is_finite() {
            return Err(CliError::Usage(format!("phi: power exponent must be > 0, got {p}")));
        }
    }
    Ok(profile)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn short_region_specs() {
        assert_eq!(
            RegionSpec::from_value(&json!("cube")).unwrap(),
            RegionSpec::Box { min: [0.0; 3], max: [1.0; 3] }
        );
        assert!(matches!(
            RegionSpec::from_value(&json!("icosphere:3")).unwrap(),
            RegionSpec::Icosphere { subdivisions: 3, .. }
        ));
        assert!(matches!(RegionSpec::from_value(&json!("zigzag:8")).unwrap(), RegionSpec::Zigzag { blocks: 8, .. }));
        assert!(RegionSpec::from_value(&json!("torus")).is_err());
        assert!(RegionSpec::from_value(&json!("cube:3")).is_err());
    }

    #[test]
    fn json_region_spec() {
        let r = RegionSpec::from_value(&json!({"shape": "ball", "radius": 2.0})).unwrap();
        assert_eq!(r, RegionSpec::Ball { center: [0.0; 3], radius: 2.0 });
        assert!((r.build().unwrap().volume() - 32.0 * std::f64::consts::PI / 3.0).abs() < 1e-12);
        assert!(RegionSpec::from_value(&json!({"shape": "ball", "radius": 2.0, "r": 1})).is_err());
    }

    #[test]
    fn explicit_zigzag_sequence() {
        let r = RegionSpec::from_value(&json!({"shape": "zigzag", "sequence": [0.5, 0.25]})).unwrap();
        let seq = r.zigzag_sequence().unwrap().unwrap();
        assert_eq!(seq.a, vec![0.5, 0.25]);
        assert!((seq.tail_sum - 0.25).abs() < 1e-15);
    }

    #[test]
    fn sampler_specs() {
        assert_eq!(parse_sampler(&json!("grid:10"), 0).unwrap(), Sampler::Grid { n: 10 });
        assert_eq!(parse_sampler(&json!("mc:100"), 7).unwrap(), Sampler::MonteCarlo { samples: 100, seed: 7 });
        assert!(parse_sampler(&json!("mc"), 0).is_err());
    }

    #[test]
    fn profile_specs() {
        assert_eq!(parse_profile(&json!("power:0.5")).unwrap(), DecayProfile::Power { p: 0.5 });
        assert_eq!(parse_profile(&json!("inverse_log")).unwrap(), DecayProfile::InverseLog);
        for bad in ["power:x", "power:-1", "log", "zero:1"] {
            assert_eq!(parse_profile(&json!(bad)).unwrap_err().exit_code(), 2, "{bad}");
        }
    }
}
