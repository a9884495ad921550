//! Experiment presets, INI-style config files and command-line overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use aorhb_core::zoo::{InstanceKind, InstanceSpec};
use ini::Ini;

use crate::error::{CliError, CliResult};

/// Environment variable holding the default output directory.
pub const OUT_DIR_ENV: &str = "AORHB_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "aorhb-out";
pub const DEFAULT_SEED: u64 = 42;

macro_rules! named_enum {
    ($(#[$m:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$m])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $name { $($variant),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn name(self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $name {
            type Err = CliError;
            fn from_str(s: &str) -> CliResult<Self> {
                let s = s.trim();
                Self::ALL.iter().copied().find(|v| v.name() == s).ok_or_else(|| {
                    let names: Vec<_> = Self::ALL.iter().map(|v| v.name()).collect();
                    CliError::Config(format!(
                        "unknown {} '{s}' (expected one of: {})",
                        stringify!($name).to_lowercase(),
                        names.join(", ")
                    ))
                })
            }
        }
    };
}

named_enum!(
    /// Preset experiments; `custom` takes its problem from the config.
    Experiment {
        PiecewiseFig1 => "piecewise_fig1",
        LogisticFig2 => "logistic_fig2",
        LassoFig3 => "lasso_fig3",
        L1l2Fig4 => "l1l2_fig4",
        MspbeFig5 => "mspbe_fig5",
        ScalingFig6 => "scaling_fig6",
        Custom => "custom",
    }
);

named_enum!(
    Scale {
        Desk => "desk",
        Paper => "paper",
    }
);

named_enum!(
    SolverId {
        Gd => "gd",
        HeavyBall => "hb",
        Nag => "nag",
        AorHb => "aor_hb",
        AorHbTwoVar => "aor_hb_two_var",
        AorHbZero => "aor_hb_zero",
        AorHbComposite => "aor_hb_composite",
        ProximalGradient => "proximal_gradient",
        AorHbSaddle => "aor_hb_saddle",
        AorHbSaddleImplicit => "aor_hb_saddle_implicit",
        Extragradient => "extragradient",
    }
);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProblemClass {
    Smooth,
    Composite,
    Saddle,
}

impl fmt::Display for ProblemClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemClass::Smooth => "smooth",
            ProblemClass::Composite => "composite",
            ProblemClass::Saddle => "saddle",
        })
    }
}

impl SolverId {
    pub fn class(self) -> ProblemClass {
        use SolverId::*;
        match self {
            Gd | HeavyBall | Nag | AorHb | AorHbTwoVar | AorHbZero => ProblemClass::Smooth,
            AorHbComposite | ProximalGradient => ProblemClass::Composite,
            AorHbSaddle | AorHbSaddleImplicit | Extragradient => ProblemClass::Saddle,
        }
    }
}

pub fn problem_class(kind: InstanceKind) -> ProblemClass {
    match kind {
        InstanceKind::Quadratic
        | InstanceKind::Piecewise
        | InstanceKind::Logistic
        | InstanceKind::LeastSquaresSingular => ProblemClass::Smooth,
        InstanceKind::Lasso | InstanceKind::L1L2 => ProblemClass::Composite,
        InstanceKind::Mspbe => ProblemClass::Saddle,
    }
}

/// Fully resolved description of one experiment run.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub scale: Scale,
    pub solvers: Vec<SolverId>,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub max_iters: usize,
    /// Relative-error stopping tolerance `‖x_k − x*‖ ≤ tol·‖x_0 − x*‖`.
    pub tolerance: Option<f64>,
    pub record_every: usize,
    /// Condition numbers for a sweep; empty for single runs.
    pub kappas: Vec<f64>,
    /// Fill the `wall_ms` CSV column. Off by default so reruns are byte-identical.
    pub wall_time: bool,
    pub instance: InstanceSpec,
}

/// Values given on the command line; they take precedence over the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub experiment: Option<Experiment>,
    pub scale: Option<Scale>,
    pub solvers: Option<Vec<SolverId>>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub max_iters: Option<usize>,
    pub tolerance: Option<f64>,
    pub kappas: Option<Vec<f64>>,
    pub wall_time: bool,
}

impl ExperimentConfig {
    /// Defaults for a preset. Desk scale shrinks the problem sizes while
    /// keeping the conditioning; paper scale uses the full sizes.
    pub fn preset(experiment: Experiment, scale: Scale, seed: u64) -> Self {
        use SolverId::*;
        let paper = scale == Scale::Paper;
        let smooth_solvers = vec![Gd, HeavyBall, Nag, AorHb, AorHbTwoVar];
        let saddle_solvers = vec![AorHbSaddle, AorHbSaddleImplicit, Extragradient];
        let lasso_dims: &[usize] = if paper { &[1024, 256] } else { &[256, 64] };
        let mspbe_dims: &[usize] = if paper { &[2500, 50] } else { &[250, 20] };
        let spec = |kind, dims: &[usize], kappa| InstanceSpec::new(kind, dims, kappa, seed);
        let (instance, solvers, max_iters, tolerance, kappas) = match experiment {
            Experiment::PiecewiseFig1 => (
                spec(InstanceKind::Piecewise, if paper { &[100, 5] } else { &[50, 5] }, Some(1e4))
                    .with_param("mu", 1.0)
                    .with_param("r", 1e-6),
                smooth_solvers,
                10_000,
                None,
                vec![],
            ),
            Experiment::LogisticFig2 => (
                spec(InstanceKind::Logistic, if paper { &[50, 1000] } else { &[50, 200] }, None)
                    .with_param("lambda", 0.1),
                smooth_solvers,
                3000,
                None,
                vec![],
            ),
            Experiment::LassoFig3 | Experiment::L1l2Fig4 => {
                let kind = if experiment == Experiment::LassoFig3 { InstanceKind::Lasso } else { InstanceKind::L1L2 };
                (
                    spec(kind, lasso_dims, None).with_param("lambda", 0.8).with_param("sparsity", 5.0),
                    vec![AorHbComposite, ProximalGradient],
                    1000,
                    None,
                    vec![],
                )
            }
            Experiment::MspbeFig5 => (spec(InstanceKind::Mspbe, mspbe_dims, Some(1e4)), saddle_solvers, 20_000, None, vec![]),
            Experiment::ScalingFig6 => (
                spec(InstanceKind::Mspbe, mspbe_dims, Some(1e2)),
                saddle_solvers,
                2_000_000,
                Some(1e-6),
                vec![1e2, 1e3, 1e4],
            ),
            Experiment::Custom => (spec(InstanceKind::Quadratic, &[50], Some(100.0)), vec![AorHb], 1000, None, vec![]),
        };
        Self {
            experiment,
            scale,
            solvers,
            seed,
            output_dir: PathBuf::from(DEFAULT_OUT_DIR),
            max_iters,
            tolerance,
            record_every: 1,
            kappas,
            wall_time: false,
            instance,
        }
    }

    /// Preset, then config-file keys, then command-line overrides.
    pub fn resolve(file: Option<&Path>, cli: &Overrides) -> CliResult<Self> {
        let keys = match file {
            Some(p) => read_config_file(p)?,
            None => BTreeMap::new(),
        };
        let parsed = |key: &str| keys.get(key).map(|v| v.as_str());
        let experiment = match (cli.experiment, parsed("experiment")) {
            (Some(e), _) => e,
            (None, Some(v)) => v.parse()?,
            (None, None) => Experiment::Custom,
        };
        let scale = match (cli.scale, parsed("scale")) {
            (Some(s), _) => s,
            (None, Some(v)) => v.parse()?,
            (None, None) => Scale::Desk,
        };
        let seed = match (cli.seed, parsed("seed")) {
            (Some(s), _) => s,
            (None, Some(v)) => parse_value("seed", v)?,
            (None, None) => DEFAULT_SEED,
        };
        let mut cfg = Self::preset(experiment, scale, seed);
        if let Ok(dir) = std::env::var(OUT_DIR_ENV) {
            if !dir.is_empty() {
                cfg.output_dir = PathBuf::from(dir);
            }
        }
        cfg.apply_keys(&keys)?;
        cfg.apply_overrides(cli);
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies file keys; `problem` goes first because a new problem kind
    /// drops the preset's instance parameters.
    fn apply_keys(&mut self, keys: &BTreeMap<String, String>) -> CliResult<()> {
        if let Some(kind) = keys.get("problem") {
            self.apply_key("problem", kind)?;
        }
        for (key, value) in keys.iter().filter(|(k, _)| k.as_str() != "problem") {
            self.apply_key(key, value)?;
        }
        Ok(())
    }

    fn apply_key(&mut self, key: &str, value: &str) -> CliResult<()> {
        match key {
            "experiment" | "scale" | "seed" => {}
            "solvers" => self.solvers = parse_list(value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "max_iters" => self.max_iters = parse_value(key, value)?,
            "tolerance" => self.tolerance = Some(parse_value(key, value)?),
            "record_every" => self.record_every = parse_value(key, value)?,
            "wall_time" => self.wall_time = parse_value(key, value)?,
            "kappas" => self.kappas = parse_list(value)?,
            "problem" => {
                let kind = value.parse().map_err(|e| CliError::Config(format!("{e}")))?;
                if kind != self.instance.kind {
                    self.instance.kind = kind;
                    self.instance.params.clear();
                }
            }
            "dims" => self.instance.dims = parse_list(value)?,
            "kappa" => self.instance.kappa = Some(parse_value(key, value)?),
            _ => {
                let v: f64 = value
                    .trim()
                    .parse()
                    .map_err(|_| CliError::Config(format!("unknown key '{key}' (instance parameters must be numbers)")))?;
                self.instance.params.insert(key.to_string(), v);
            }
        }
        Ok(())
    }

    fn apply_overrides(&mut self, cli: &Overrides) {
        if let Some(s) = &cli.solvers {
            self.solvers = s.clone();
        }
        if let Some(d) = &cli.output_dir {
            self.output_dir = d.clone();
        }
        if let Some(n) = cli.max_iters {
            self.max_iters = n;
        }
        if let Some(t) = cli.tolerance {
            self.tolerance = Some(t);
        }
        if let Some(k) = &cli.kappas {
            self.kappas = k.clone();
        }
        self.wall_time |= cli.wall_time;
        self.instance.seed = self.seed;
    }

    pub fn class(&self) -> ProblemClass {
        problem_class(self.instance.kind)
    }

    pub fn is_sweep(&self) -> bool {
        !self.kappas.is_empty()
    }

    /// Checks everything that can be checked before any computation.
    pub fn validate(&self) -> CliResult<()> {
        if self.solvers.is_empty() {
            return Err(CliError::Config("no solvers selected".into()));
        }
        let class = self.class();
        for s in &self.solvers {
            if s.class() != class {
                return Err(CliError::Config(format!(
                    "solver {s} handles {} problems but {} is a {class} problem",
                    s.class(),
                    self.instance.kind
                )));
            }
        }
        let known = self.instance.kind.param_names();
        if let Some(k) = self.instance.params.keys().find(|k| !known.contains(&k.as_str())) {
            return Err(CliError::Config(format!(
                "unknown key '{k}' ({} instances take {})",
                self.instance.kind,
                if known.is_empty() { "no parameters".to_string() } else { known.join(", ") }
            )));
        }
        let mut seen = self.solvers.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.solvers.len() {
            return Err(CliError::Config("solver list contains duplicates".into()));
        }
        if self.max_iters == 0 || self.record_every == 0 {
            return Err(CliError::Config("max_iters and record_every must be positive".into()));
        }
        if let Some(t) = self.tolerance {
            if !(t > 0.0 && t < 1.0) {
                return Err(CliError::Config(format!("tolerance must lie in (0, 1), got {t}")));
            }
        }
        if self.kappas.iter().any(|&k| !(k >= 1.0 && k.is_finite())) {
            return Err(CliError::Config("sweep condition numbers must be finite and ≥ 1".into()));
        }
        if self.kappas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::Config("sweep condition numbers must be strictly increasing".into()));
        }
        Ok(())
    }

    /// `key = value` lines in a fixed order, as echoed into metadata.
    pub fn echo(&self) -> Vec<(String, String)> {
        let join = |v: Vec<String>| v.join(",");
        let mut out = vec![
            ("experiment".into(), self.experiment.to_string()),
            ("scale".into(), self.scale.to_string()),
            ("seed".into(), self.seed.to_string()),
            ("solvers".into(), join(self.solvers.iter().map(|s| s.to_string()).collect())),
            ("problem".into(), self.instance.kind.to_string()),
            ("dims".into(), join(self.instance.dims.iter().map(|d| d.to_string()).collect())),
            ("kappa".into(), self.instance.kappa.map(|k| format!("{k:?}")).unwrap_or_default()),
            ("max_iters".into(), self.max_iters.to_string()),
            ("tolerance".into(), self.tolerance.map(|t| format!("{t:?}")).unwrap_or_default()),
            ("record_every".into(), self.record_every.to_string()),
            ("kappas".into(), join(self.kappas.iter().map(|k| format!("{k:?}")).collect())),
            ("wall_time".into(), self.wall_time.to_string()),
        ];
        for (k, v) in &self.instance.params {
            out.push((k.clone(), format!("{v:?}")));
        }
        out
    }
}

/// Reads the flat `key = value` file; keys from any section are merged and
/// later duplicates win.
pub fn read_config_file(path: &Path) -> CliResult<BTreeMap<String, String>> {
    let ini = Ini::load_from_file(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok(ini_keys(&ini))
}

pub fn parse_config_text(text: &str) -> CliResult<BTreeMap<String, String>> {
    let ini = Ini::load_from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
    Ok(ini_keys(&ini))
}

fn ini_keys(ini: &Ini) -> BTreeMap<String, String> {
    ini.iter().flat_map(|(_, props)| props.iter()).map(|(k, v)| (k.trim().to_string(), v.trim().to_string())).collect()
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> CliResult<T> {
    value.trim().parse().map_err(|_| CliError::Config(format!("invalid value '{value}' for {key}")))
}

fn parse_list<T: FromStr>(value: &str) -> CliResult<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| CliError::Config(format!("invalid list entry '{s}'"))))
        .collect()
}
