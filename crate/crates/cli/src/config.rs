use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use statlength_core::axioms::{AxiomConfig, AxiomName, Verdict};
use statlength_core::uniqueness::SearchConfig;
use statlength_core::SimulationConfig;

/// Run configuration file. Every section is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub axioms: AxiomConfig,
    pub search: SearchConfig,
    pub simulation: SimulationConfig,
    /// Expected verdict per axiom; only listed axioms are compared. An
    /// empty profile expects every check to pass.
    pub expect: BTreeMap<AxiomName, Verdict>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// `--seed` overrides every section's seed.
    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        if let Some(s) = seed {
            self.axioms.rng_seed = s;
            self.search.rng_seed = s;
            self.simulation.rng_seed = s;
        }
        self
    }

    pub fn expected(&self, axiom: AxiomName) -> Verdict {
        self.expect.get(&axiom).copied().unwrap_or(Verdict::Pass)
    }

    /// Whether the verdict for `axiom` is compared against the profile.
    pub fn checks(&self, axiom: AxiomName) -> bool {
        self.expect.is_empty() || self.expect.contains_key(&axiom)
    }
}
