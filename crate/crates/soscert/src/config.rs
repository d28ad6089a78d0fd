//! Configuration file (TOML) with flag overrides applied by the CLI.
//!
//! Every key is optional; missing keys take the defaults below.
//!
//! ```toml
//! [pipeline]
//! source = "baseline"      # replay | baseline | http
//! budget = 32
//! per_call = 1
//! timeout_s = 3600.0
//! parallelism = 0          # 0 = one worker per core
//! seed = 0
//! replay_dir = "replay"    # per-problem `<id>.sos` files
//!
//! [refine]
//! tol_tau = 1e-15
//! max_iters = 50
//! precision_bits = 256
//!
//! [recover]
//! rank_eps = 1e-8
//! denom_bound = 1000000
//! lll_delta = "3/4"
//!
//! [reward]
//! alpha = 0.5
//! w_acc = 0.9
//! w_fmt = 0.1
//!
//! [lean]
//! theorem_name = "sos_nonneg"
//! check_command = ["lake", "env", "lean"]
//!
//! [http]
//! url = "https://example.invalid/v1/chat/completions"
//! model = "sos-conjecturer"
//! ```

use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use soscert_core::conjecture::BaselineSource;
use soscert_core::gram::DEFAULT_BASIS_CAP;
use soscert_core::lean::LeanEmitConfig;
use soscert_core::prove::ProveConfig;
use soscert_core::recover::RecoverConfig;
use soscert_core::refine::RefineConfig;
use soscert_core::reward::RewardConfig;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config {path}: {source}")]
    Parse { path: PathBuf, source: Box<toml::de::Error> },
    #[error("invalid value for {key}: {message}")]
    Value { key: &'static str, message: String },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SourceKind {
    Replay,
    #[default]
    Baseline,
    Http,
}

impl FromStr for SourceKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "replay" => Ok(SourceKind::Replay),
            "baseline" => Ok(SourceKind::Baseline),
            "http" => Ok(SourceKind::Http),
            _ => Err(format!("unknown source `{s}` (expected replay, baseline or http)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineSection {
    pub source: SourceKind,
    pub budget: usize,
    pub per_call: usize,
    pub timeout_s: f64,
    pub parallelism: usize,
    pub seed: u64,
    pub replay_dir: Option<PathBuf>,
    /// Recovery is tried when refinement ends at or below this backward error.
    pub recover_theta: f64,
    pub basis_cap: usize,
    /// Baseline stops proposing once a candidate is this close.
    pub baseline_stop_theta: f64,
    pub baseline_precision_bits: u32,
}

impl Default for PipelineSection {
    fn default() -> Self {
        PipelineSection {
            source: SourceKind::Baseline,
            budget: 32,
            per_call: 1,
            timeout_s: 3600.0,
            parallelism: 0,
            seed: 0,
            replay_dir: None,
            recover_theta: 1e-6,
            basis_cap: DEFAULT_BASIS_CAP,
            baseline_stop_theta: 1e-10,
            baseline_precision_bits: 64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RefineSection {
    pub tol_tau: f64,
    pub max_iters: usize,
    pub precision_bits: u32,
    pub damping_init: f64,
}

impl Default for RefineSection {
    fn default() -> Self {
        let d = RefineConfig::default();
        RefineSection {
            tol_tau: d.tol_tau,
            max_iters: d.max_iters,
            precision_bits: d.precision_bits,
            damping_init: d.damping_init,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecoverSection {
    pub rank_eps: f64,
    pub denom_bound: u64,
    pub lll_delta: String,
    pub max_denom_escalations: usize,
    pub diophantine_nodes: usize,
}

impl Default for RecoverSection {
    fn default() -> Self {
        let d = RecoverConfig::default();
        RecoverSection {
            rank_eps: d.rank_eps,
            denom_bound: d.denom_bound,
            lll_delta: d.lll_delta.to_string(),
            max_denom_escalations: d.max_denom_escalations,
            diophantine_nodes: d.diophantine_nodes,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardSection {
    pub alpha: f64,
    pub w_acc: f64,
    pub w_fmt: f64,
    pub lambda_soft: f64,
    pub rho_max: f64,
    pub c_hard: f64,
    pub tau_coeff: f64,
}

impl Default for RewardSection {
    fn default() -> Self {
        let d = RewardConfig::default();
        RewardSection {
            alpha: d.alpha,
            w_acc: d.w_acc,
            w_fmt: d.w_fmt,
            lambda_soft: d.lambda_soft,
            rho_max: d.rho_max,
            c_hard: d.c_hard,
            tau_coeff: d.tau_coeff,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LeanSection {
    pub theorem_name: String,
    pub variable_names: Option<Vec<String>>,
    pub include_imports: bool,
    /// Program and leading arguments; the script path is appended.
    pub check_command: Option<Vec<String>>,
    pub check_timeout_s: f64,
}

impl Default for LeanSection {
    fn default() -> Self {
        let d = LeanEmitConfig::default();
        LeanSection {
            theorem_name: d.theorem_name,
            variable_names: d.variable_names,
            include_imports: d.include_imports,
            check_command: None,
            check_timeout_s: 600.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HttpSection {
    pub url: String,
    pub model: String,
    pub temperature: f64,
    pub auth_header: String,
    pub auth_scheme: String,
    /// Environment variable holding the token.
    pub token_env: String,
    pub max_concurrent: usize,
    pub request_timeout_s: f64,
    pub retries: usize,
}

impl Default for HttpSection {
    fn default() -> Self {
        HttpSection {
            url: String::new(),
            model: String::new(),
            temperature: 0.7,
            auth_header: "Authorization".into(),
            auth_scheme: "Bearer".into(),
            token_env: "SOSCERT_API_TOKEN".into(),
            max_concurrent: 4,
            request_timeout_s: 120.0,
            retries: 2,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub pipeline: PipelineSection,
    pub refine: RefineSection,
    pub recover: RecoverSection,
    pub reward: RewardSection,
    pub lean: LeanSection,
    pub http: HttpSection,
}

impl Config {
    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        let cfg: Config =
            toml::from_str(&text).map_err(|e| ConfigError::Parse { path: path.into(), source: Box::new(e) })?;
        cfg.validate()?;
        Ok(cfg)
    }

    #[allow(clippy::neg_cmp_op_on_partial_ord, reason = "NaN must be rejected")]
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |key, message: &str| Err(ConfigError::Value { key, message: message.into() });
        if self.pipeline.budget == 0 {
            return bad("pipeline.budget", "must be at least 1");
        }
        if self.pipeline.per_call == 0 {
            return bad("pipeline.per_call", "must be at least 1");
        }
        if !(self.pipeline.timeout_s > 0.0) {
            return bad("pipeline.timeout_s", "must be positive");
        }
        if self.refine.precision_bits < 53 {
            return bad("refine.precision_bits", "must be at least 53");
        }
        self.lll_delta()?;
        self.reward_config()
            .validate()
            .map_err(|e| ConfigError::Value { key: "reward", message: e.to_string() })?;
        Ok(())
    }

    fn lll_delta(&self) -> Result<BigRational, ConfigError> {
        let err = || ConfigError::Value { key: "recover.lll_delta", message: "expected a rational in (1/4, 1]".into() };
        let d: BigRational = self.recover.lll_delta.trim().parse().map_err(|_| err())?;
        let quarter = BigRational::new(1.into(), 4.into());
        if d <= quarter || d > BigRational::from_integer(1.into()) {
            return Err(err());
        }
        Ok(d)
    }

    pub fn refine_config(&self) -> RefineConfig {
        RefineConfig {
            tol_tau: self.refine.tol_tau,
            max_iters: self.refine.max_iters,
            precision_bits: self.refine.precision_bits,
            damping_init: self.refine.damping_init,
            ..RefineConfig::default()
        }
    }

    pub fn recover_config(&self) -> RecoverConfig {
        RecoverConfig {
            rank_eps: self.recover.rank_eps,
            denom_bound: self.recover.denom_bound,
            lll_delta: self.lll_delta().unwrap_or_else(|_| RecoverConfig::default().lll_delta),
            max_denom_escalations: self.recover.max_denom_escalations,
            diophantine_nodes: self.recover.diophantine_nodes,
            bound_tau: self.refine.tol_tau,
            ..RecoverConfig::default()
        }
    }

    pub fn prove_config(&self) -> ProveConfig {
        ProveConfig {
            refine: self.refine_config(),
            recover: self.recover_config(),
            recover_theta: self.pipeline.recover_theta,
            basis_cap: self.pipeline.basis_cap,
        }
    }

    pub fn reward_config(&self) -> RewardConfig {
        let r = &self.reward;
        RewardConfig {
            alpha: r.alpha,
            w_acc: r.w_acc,
            w_fmt: r.w_fmt,
            lambda_soft: r.lambda_soft,
            rho_max: r.rho_max,
            c_hard: r.c_hard,
            tau_coeff: r.tau_coeff,
        }
    }

    pub fn lean_config(&self) -> LeanEmitConfig {
        LeanEmitConfig {
            theorem_name: self.lean.theorem_name.clone(),
            variable_names: self.lean.variable_names.clone(),
            include_imports: self.lean.include_imports,
        }
    }

    /// Baseline settings with the seed left for the caller.
    pub fn baseline(&self, seed: u64) -> BaselineSource {
        let base = BaselineSource::default();
        BaselineSource {
            seed,
            refine: RefineConfig { precision_bits: self.pipeline.baseline_precision_bits, ..base.refine },
            basis_cap: self.pipeline.basis_cap,
            stop_theta: Some(self.pipeline.baseline_stop_theta),
        }
    }
}
