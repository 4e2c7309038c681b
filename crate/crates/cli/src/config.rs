//! Run configuration: a versioned JSON document validated strictly before
//! any computation. All numeric knobs live here; CLI flags override the
//! seed, output directory, thread cap and enumeration budget.

use std::path::{Path, PathBuf};

use congcount::{Error, Result};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    /// Semigroup spec document, resolved relative to this config file.
    pub spec_path: String,
    #[serde(default)]
    pub delta: DeltaConfig,
    #[serde(default)]
    pub count: CountConfig,
    #[serde(default)]
    pub spectral: SpectralConfig,
    #[serde(default)]
    pub expander: ExpanderConfig,
    #[serde(default)]
    pub zaremba: ZarembaConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub lnic: LnicConfig,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeltaConfig {
    pub tolerance: f64,
    pub depth: usize,
    /// Number of grid points for the emitted pressure curve.
    pub curve_points: usize,
    /// Depth for the pressure curve (kept shallow; the curve is a plot aid).
    pub curve_depth: usize,
}

impl Default for DeltaConfig {
    fn default() -> Self {
        DeltaConfig {
            tolerance: 1e-8,
            depth: 8,
            curve_points: 11,
            curve_depth: 6,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountConfig {
    /// Moduli; [re, im] pairs.
    pub q: Vec<[i64; 2]>,
    /// First checkpoint radius R₀ (the schedule is R_j = R₀·2^{j/2}).
    pub r0: f64,
    pub checkpoints: usize,
    /// γ₀ as a word in the block symbols (0-based), empty for e.
    pub gamma0_word: Vec<usize>,
    pub budget: u64,
    pub group_cap: usize,
    /// Optional locally constant F: (word, value) pairs plus default.
    pub f_entries: Vec<(Vec<usize>, f64)>,
    pub f_default: f64,
}

impl Default for CountConfig {
    fn default() -> Self {
        CountConfig {
            q: vec![[1, 0]],
            r0: 8.0,
            checkpoints: 10,
            gamma0_word: Vec::new(),
            budget: 10_000_000,
            group_cap: 5000,
            f_entries: Vec::new(),
            f_default: 1.0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralConfig {
    pub q: Vec<[i64; 2]>,
    /// ξ = a + ib.
    pub xi: [f64; 2],
    pub depth: usize,
    pub k_max: usize,
    pub trials: usize,
    pub group_cap: usize,
    pub delta_tolerance: f64,
    pub delta_depth: usize,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        SpectralConfig {
            q: vec![[2, 0], [3, 0], [5, 0]],
            xi: [0.0, 0.0],
            depth: 4,
            k_max: 18,
            trials: 4,
            group_cap: 10_000,
            delta_tolerance: 1e-8,
            delta_depth: 6,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpanderConfig {
    pub q: Vec<[i64; 2]>,
    pub p: Vec<usize>,
    pub y: usize,
    pub z: usize,
    pub eigensolve_cap: usize,
    pub group_cap: usize,
    /// Cycle length for the circulant control row.
    pub cycle_control: i64,
}

impl Default for ExpanderConfig {
    fn default() -> Self {
        ExpanderConfig {
            q: vec![[2, 0], [3, 0], [5, 0], [7, 0]],
            p: vec![1, 2],
            y: 0,
            z: 0,
            eigensolve_cap: 2000,
            group_cap: 5000,
            cycle_control: 12,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZarembaConfig {
    /// Bound on N(d) for the denominator set.
    pub bound: u64,
    /// Density checkpoints N (real alphabets only).
    pub density_n: Vec<u64>,
    pub collect_fractions: bool,
}

impl Default for ZarembaConfig {
    fn default() -> Self {
        ZarembaConfig {
            bound: 500,
            density_n: vec![1000, 10_000],
            collect_fractions: false,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub trace_pairs: usize,
    pub translation_pairs: usize,
    pub sandwich_samples: usize,
    pub renewal_q: Vec<[i64; 2]>,
    pub renewal_instances: usize,
    pub group_cap: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            trace_pairs: 1000,
            translation_pairs: 100,
            sandwich_samples: 10_000,
            renewal_q: vec![[2, 0], [3, 0]],
            renewal_instances: 100,
            group_cap: 5000,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LnicConfig {
    pub m: Vec<usize>,
    pub samples: usize,
}

impl Default for LnicConfig {
    fn default() -> Self {
        LnicConfig {
            m: vec![1, 2],
            samples: 64,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::config(format!("config parse: {e}")))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(Error::config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        cfg.base_dir = path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        Ok(cfg)
    }

    pub fn spec_file(&self) -> PathBuf {
        let p = Path::new(&self.spec_path);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}
