use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// The seven evaluated sampling strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyId {
    /// Random sampling.
    #[serde(alias = "RS")]
    Rs,
    /// Blue noise sampling.
    #[serde(alias = "BNS")]
    Bns,
    /// Density biased sampling.
    #[serde(alias = "DBS")]
    Dbs,
    /// Multi-class blue noise sampling.
    #[serde(alias = "MCBNS")]
    Mcbns,
    /// Outlier biased density based sampling.
    #[serde(alias = "OBDBS")]
    Obdbs,
    /// Multi-view Z-order sampling.
    #[serde(alias = "MVZS")]
    Mvzs,
    /// Recursive subdivision based sampling.
    #[serde(alias = "RSBS")]
    Rsbs,
}

impl StrategyId {
    pub const ALL: [StrategyId; 7] = [
        StrategyId::Rs,
        StrategyId::Bns,
        StrategyId::Dbs,
        StrategyId::Mcbns,
        StrategyId::Obdbs,
        StrategyId::Mvzs,
        StrategyId::Rsbs,
    ];

    pub fn acronym(self) -> &'static str {
        match self {
            StrategyId::Rs => "RS",
            StrategyId::Bns => "BNS",
            StrategyId::Dbs => "DBS",
            StrategyId::Mcbns => "MCBNS",
            StrategyId::Obdbs => "OBDBS",
            StrategyId::Mvzs => "MVZS",
            StrategyId::Rsbs => "RSBS",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StrategyId::Rs => "random sampling",
            StrategyId::Bns => "blue noise sampling",
            StrategyId::Dbs => "density biased sampling",
            StrategyId::Mcbns => "multi-class blue noise sampling",
            StrategyId::Obdbs => "outlier biased density based sampling",
            StrategyId::Mvzs => "multi-view Z-order sampling",
            StrategyId::Rsbs => "recursive subdivision based sampling",
        }
    }

    /// Whether the returned size is exactly the requested one; the other
    /// strategies land within the rate tolerance.
    pub fn exact_count(self) -> bool {
        !matches!(self, StrategyId::Mvzs | StrategyId::Rsbs)
    }
}

impl fmt::Display for StrategyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.acronym())
    }
}

impl FromStr for StrategyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StrategyId::ALL
            .into_iter()
            .find(|id| id.acronym().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown strategy '{s}'")))
    }
}

/// Capability flags of a strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyCapabilities {
    pub multi_class: bool,
    pub non_uniform: bool,
    pub spatial_separation: bool,
    pub density: bool,
    pub outlier: bool,
}

pub fn capabilities(s: StrategyId) -> StrategyCapabilities {
    // (MC, NU, S, D, O)
    let (multi_class, non_uniform, spatial_separation, density, outlier) = match s {
        StrategyId::Rs => (false, false, false, false, false),
        StrategyId::Bns => (false, true, true, false, false),
        StrategyId::Dbs => (false, true, false, true, false),
        StrategyId::Obdbs => (false, true, false, true, true),
        StrategyId::Mcbns => (true, true, true, false, false),
        StrategyId::Mvzs => (true, true, false, true, false),
        StrategyId::Rsbs => (true, true, false, true, true),
    };
    StrategyCapabilities {
        multi_class,
        non_uniform,
        spatial_separation,
        density,
        outlier,
    }
}
