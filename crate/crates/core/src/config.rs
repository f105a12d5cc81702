//! Hardware parameters.
//!
//! Defaults: a 64x64 dense array with 2 MiB each of input, weight and output
//! buffer (6 MiB); a graph engine of 32 GPEs with 32 SIMD lanes, a 16 MiB
//! feature scratchpad and an 8 MiB edge scratchpad (24 MiB); 256 bytes per
//! cycle of off-chip bandwidth, i.e. 256 GB/s at the assumed 1 GHz clock,
//! with an assumed 100-cycle access latency.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::engine::{DenseConfig, GraphEngineConfig};
use crate::error::{Error, Result};
use crate::memory::DramConfig;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HardwareConfig {
    pub dense: DenseConfig,
    pub graph: GraphEngineConfig,
    pub memory: DramConfig,
    /// Converts cycles to time in reports only.
    pub clock_ghz: f64,
}

impl Default for HardwareConfig {
    fn default() -> Self {
        Self {
            dense: DenseConfig::default(),
            graph: GraphEngineConfig::default(),
            memory: DramConfig::default(),
            clock_ghz: 1.0,
        }
    }
}

impl HardwareConfig {
    pub fn validate(&self) -> Result<()> {
        self.dense.validate()?;
        self.graph.validate()?;
        if self.memory.bandwidth_bytes_per_cycle == 0 {
            return Err(Error::Config("memory.bandwidth_bytes_per_cycle must be positive".into()));
        }
        if !(self.clock_ghz.is_finite() && self.clock_ghz > 0.0) {
            return Err(Error::Config("clock_ghz must be positive".into()));
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let hw: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        hw.validate()?;
        Ok(hw)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("hardware config serializes")
    }

    pub fn scaled(&self, knob: ScaleKnob) -> Self {
        let mut hw = *self;
        match knob {
            ScaleKnob::GraphMemory => {
                hw.graph.feature_scratch *= 2;
                hw.graph.edge_scratch *= 2;
            }
            ScaleKnob::DenseArray => hw.dense.arrays *= 2,
            ScaleKnob::Bandwidth => hw.memory.bandwidth_bytes_per_cycle *= 2,
        }
        hw
    }
}

/// A resource doubled in the scaling study.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleKnob {
    /// Both graph-engine scratchpads.
    GraphMemory,
    /// Number of systolic arrays.
    DenseArray,
    Bandwidth,
}

impl ScaleKnob {
    pub const ALL: [ScaleKnob; 3] = [ScaleKnob::GraphMemory, ScaleKnob::DenseArray, ScaleKnob::Bandwidth];
}

impl fmt::Display for ScaleKnob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScaleKnob::GraphMemory => "graph_memory",
            ScaleKnob::DenseArray => "dense_array",
            ScaleKnob::Bandwidth => "bandwidth",
        })
    }
}

impl FromStr for ScaleKnob {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "graph_memory" => Ok(ScaleKnob::GraphMemory),
            "dense_array" => Ok(ScaleKnob::DenseArray),
            "bandwidth" => Ok(ScaleKnob::Bandwidth),
            _ => Err(Error::Config(format!("unknown scale knob {s:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_total_thirty_mib() {
        let hw = HardwareConfig::default();
        let mib = 1 << 20;
        assert_eq!(hw.graph.feature_scratch + hw.graph.edge_scratch, 24 * mib);
        assert_eq!(hw.dense.input_buf + hw.dense.weight_buf + hw.dense.output_buf, 6 * mib);
        // one MAC is two operations: about 8 TFLOPs at 1 GHz
        assert_eq!(2 * hw.dense.peak_macs(), 8192);
        // apply + reduce per lane: about 2 TFLOPs at 1 GHz
        assert_eq!(2 * hw.graph.num_gpes * hw.graph.simd_width, 2048);
        assert_eq!(hw.memory.bandwidth_bytes_per_cycle, 256);
        hw.validate().unwrap();
    }

    #[test]
    fn toml_partial_sections() {
        let hw = HardwareConfig::from_toml("[dense]\nrows = 32\n[memory]\nbase_latency = 0\n").unwrap();
        assert_eq!(hw.dense.rows, 32);
        assert_eq!(hw.dense.cols, 64);
        assert_eq!(hw.memory.base_latency, 0);
        assert_eq!(HardwareConfig::from_toml(&hw.to_toml()).unwrap(), hw);
        assert!(HardwareConfig::from_toml("[dense]\nrowz = 1\n").is_err());
        assert!(HardwareConfig::from_toml("[graph]\nnum_gpes = 0\n").is_err());
    }

    #[test]
    fn scaling_doubles_one_resource() {
        let hw = HardwareConfig::default();
        assert_eq!(hw.scaled(ScaleKnob::Bandwidth).memory.bandwidth_bytes_per_cycle, 512);
        assert_eq!(hw.scaled(ScaleKnob::DenseArray).dense.arrays, 2);
        let g = hw.scaled(ScaleKnob::GraphMemory).graph;
        assert_eq!(g.feature_scratch + g.edge_scratch, 48 << 20);
        assert_eq!("dense_array".parse::<ScaleKnob>().unwrap(), ScaleKnob::DenseArray);
    }
}
