//! Flag values with `off` / `exact` / `all` spellings.

use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context};
use dnisq_core::{Axis, NoiseModel, Shots};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisChoice {
    All,
    One(Axis),
}

impl FromStr for AxisChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "all" {
            return Ok(AxisChoice::All);
        }
        s.parse::<Axis>().map(AxisChoice::One).map_err(|e| e.to_string())
    }
}

impl AxisChoice {
    /// The axes to run on `available` (axes with lines of two or more).
    pub fn resolve(self, available: &[Axis]) -> anyhow::Result<Vec<Axis>> {
        match self {
            AxisChoice::All => Ok(available.to_vec()),
            AxisChoice::One(a) if available.contains(&a) => Ok(vec![a]),
            AxisChoice::One(a) => bail!("input has no lines along axis `{}`", a.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NoiseChoice {
    Off,
    Default,
    File(PathBuf),
}

impl FromStr for NoiseChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "off" => NoiseChoice::Off,
            "default" => NoiseChoice::Default,
            path => NoiseChoice::File(PathBuf::from(path)),
        })
    }
}

impl NoiseChoice {
    pub fn load(&self) -> anyhow::Result<Option<NoiseModel>> {
        match self {
            NoiseChoice::Off => Ok(None),
            NoiseChoice::Default => Ok(Some(NoiseModel::default())),
            NoiseChoice::File(p) => {
                Ok(Some(NoiseModel::from_file(p).with_context(|| format!("noise model {}", p.display()))?))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShotsChoice(pub Shots);

impl FromStr for ShotsChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "exact" {
            return Ok(ShotsChoice(Shots::Exact));
        }
        match s.parse::<u64>() {
            Ok(0) => Err("shots must be positive".into()),
            Ok(k) => Ok(ShotsChoice(Shots::Count(k))),
            Err(_) => Err(format!("expected a shot count or `exact`, got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MaxWidth(pub Option<usize>);

impl FromStr for MaxWidth {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "off" {
            return Ok(MaxWidth(None));
        }
        match s.parse::<usize>() {
            Ok(w) if w >= 2 => Ok(MaxWidth(Some(w))),
            _ => Err(format!("expected a width of at least 2 or `off`, got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Switch(pub bool);

impl FromStr for Switch {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "on" => Ok(Switch(true)),
            "off" => Ok(Switch(false)),
            _ => Err(format!("expected `on` or `off`, got `{s}`")),
        }
    }
}
