//! Scenario files. TOML by default, JSON when the file ends in `.json`.
//! Every physical quantity is a string carrying its unit, e.g. `"0.2 meV"`.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::marker::PhantomData;
use std::path::Path;

use clap::ValueEnum;
use raman_core::designer::DesignTarget;
use raman_core::envelope::PulseShape;
use raman_core::network::protocols::{Engine, Link};
use raman_core::network::trajectories::TrajectoryOptions;
use raman_core::node::{NodeModel, NodeOptions};
use raman_core::units::energy_to_rate;
use raman_core::{QubitAmplitudes, SystemParams, TimeGrid, C64};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn err<T>(key: &str, msg: impl fmt::Display) -> Result<T, ConfigError> {
    Err(ConfigError(format!("{key}: {msg}")))
}

pub trait Dim {
    const UNITS: &'static [(&'static str, f64)];
    const EXAMPLE: &'static str;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Energy {}
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Time {}
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Width {}

impl Dim for Energy {
    const UNITS: &'static [(&'static str, f64)] = &[("meV", 1.0), ("ueV", 1e-3), ("µeV", 1e-3), ("μeV", 1e-3), ("eV", 1e3)];
    const EXAMPLE: &'static str = "0.2 meV";
}

impl Dim for Time {
    const UNITS: &'static [(&'static str, f64)] = &[("ps", 1.0), ("ns", 1e3), ("fs", 1e-3)];
    const EXAMPLE: &'static str = "-200 ps";
}

/// `/gamma` measures a width in units of the sender's 1/γ.
impl Dim for Width {
    const UNITS: &'static [(&'static str, f64)] = &[("ps", 1.0), ("ns", 1e3), ("fs", 1e-3), ("/gamma", f64::NAN)];
    const EXAMPLE: &'static str = "6 /gamma";
}

/// Splits `"1.5 meV"` into the number and the rest. Takes the longest
/// numeric prefix, so `"2eV"` reads as 2 eV.
pub fn split_number(text: &str) -> Option<(f64, &str)> {
    let s = text.trim();
    (1..=s.len())
        .rev()
        .filter(|&i| s.is_char_boundary(i))
        .find_map(|i| s[..i].trim().parse::<f64>().ok().map(|v| (v, s[i..].trim())))
}

/// A number with its unit, kept as written so the echo round-trips exactly.
pub struct Quantity<D> {
    pub value: f64,
    pub unit: String,
    dim: PhantomData<D>,
}

impl<D> Clone for Quantity<D> {
    fn clone(&self) -> Self {
        Self { value: self.value, unit: self.unit.clone(), dim: PhantomData }
    }
}

impl<D> PartialEq for Quantity<D> {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value && self.unit == other.unit
    }
}

impl<D> fmt::Debug for Quantity<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.value, self.unit)
    }
}

impl<D: Dim> Quantity<D> {
    pub fn parse(text: &str) -> Result<Self, String> {
        let (value, rest) = split_number(text).ok_or_else(|| format!("cannot read a number from {text:?}"))?;
        if rest.is_empty() {
            return Err(format!("missing unit in {text:?}; write e.g. \"{}\"", D::EXAMPLE));
        }
        if !value.is_finite() {
            return Err(format!("{text:?} is not finite"));
        }
        match D::UNITS.iter().find(|(u, _)| *u == rest) {
            Some((u, _)) => Ok(Self { value, unit: u.to_string(), dim: PhantomData }),
            None => {
                let known: Vec<&str> = D::UNITS.iter().map(|(u, _)| *u).collect();
                Err(format!("unknown unit {rest:?}; expected one of {}", known.join(", ")))
            }
        }
    }

    pub fn new(value: f64, unit: &str) -> Self {
        Self::parse(&format!("{value} {unit}")).expect("valid built-in quantity")
    }

    fn factor(&self) -> f64 {
        D::UNITS.iter().find(|(u, _)| *u == self.unit).map(|(_, f)| *f).expect("unit checked on parse")
    }
}

impl Quantity<Energy> {
    /// Angular rate in ps⁻¹.
    pub fn rate(&self) -> f64 {
        energy_to_rate(self.value * self.factor())
    }
}

impl Quantity<Time> {
    pub fn ps(&self) -> f64 {
        self.value * self.factor()
    }
}

impl Quantity<Width> {
    pub fn ps(&self, gamma: f64) -> f64 {
        if self.unit == "/gamma" {
            self.value / gamma
        } else {
            self.value * self.factor()
        }
    }
}

impl<D> fmt::Display for Quantity<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.value, self.unit)
    }
}

impl<D> Serialize for Quantity<D> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de, D: Dim> Deserialize<'de> for Quantity<D> {
    fn deserialize<De: Deserializer<'de>>(d: De) -> Result<Self, De::Error> {
        match Value::deserialize(d)? {
            Value::String(s) => Quantity::parse(&s).map_err(de::Error::custom),
            Value::Number(n) => Err(de::Error::custom(format!("missing unit on {n}; write e.g. \"{}\"", D::EXAMPLE))),
            other => Err(de::Error::custom(format!("expected a quantity like \"{}\", got {other}", D::EXAMPLE))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Design,
    Send,
    Receive,
    Transfer,
    Entangle,
    Swap,
    Sweep,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Design => "design",
            Scenario::Send => "send",
            Scenario::Receive => "receive",
            Scenario::Transfer => "transfer",
            Scenario::Entangle => "entangle",
            Scenario::Swap => "swap",
            Scenario::Sweep => "sweep",
        }
    }

    fn two_node(self) -> bool {
        matches!(self, Scenario::Transfer | Scenario::Entangle)
    }

    fn carrier(self) -> bool {
        matches!(self, Scenario::Transfer | Scenario::Entangle | Scenario::Swap)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Reduced,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Sech,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineName {
    Pure,
    Master,
    Trajectories,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_cav: Option<Quantity<Energy>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Quantity<Energy>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma0: Option<Quantity<Energy>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_trion: Option<Quantity<Energy>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_zeeman: Option<Quantity<Energy>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    /// Keep the couplings that are off resonance by the Zeeman splitting.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub off_resonant: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shape: Option<Shape>,
    /// sech: `sech((t − center)/width)`; gaussian: intensity standard deviation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub width: Option<Quantity<Width>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<Quantity<Time>>,
    /// Rotation angle in radians; sin²θ photons are emitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_start: Option<Quantity<Time>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<Quantity<Time>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_steps: Option<usize>,
}

/// Qubit amplitudes as `[re, im]` pairs; normalised on use.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_g: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_e: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntangleConfig {
    /// Requested phase between the two branches, radians.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwapConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stored: Option<QubitConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub incoming: Option<QubitConfig>,
    /// Arrival of the incoming photon after the send pulse.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delay: Option<Quantity<Time>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub engine: Option<EngineName>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recycle: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub propagation_phase: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delay: Option<Quantity<Time>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_traj: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Scenario run at every point.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<Scenario>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<Scenario>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<Model>,
    /// The only node, or the sender of a link.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub node: Option<NodeConfig>,
    /// Defaults to a copy of `node`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub receiver: Option<NodeConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    /// Initial qubit for send and transfer.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state: Option<QubitConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entangle: Option<EntangleConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub swap: Option<SwapConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub link: Option<LinkConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectories: Option<TrajectoryConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
}

/// Reads a config file into an untyped tree.
pub fn read_tree(path: &Path) -> Result<Value, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    let json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let tree: Value = if json {
        serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?
    } else {
        toml::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?
    };
    if !tree.is_object() {
        return Err(ConfigError(format!("{}: top level must be a table", path.display())));
    }
    Ok(tree)
}

/// Typed view of a tree; errors carry the dotted key path.
pub fn from_tree(tree: Value) -> Result<ScenarioConfig, ConfigError> {
    serde_path_to_error::deserialize(tree).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            ConfigError(inner.to_string())
        } else {
            ConfigError(format!("{path}: {inner}"))
        }
    })
}

/// Sets `path` in the tree, creating tables on the way.
pub fn set_key(tree: &mut Value, path: &[&str], value: Value) -> Result<(), ConfigError> {
    let mut node = tree;
    for (i, key) in path.iter().enumerate() {
        let map = node.as_object_mut().ok_or_else(|| ConfigError(format!("{}: expected a table", path[..i].join("."))))?;
        if i + 1 == path.len() {
            map.insert(key.to_string(), value);
            return Ok(());
        }
        node = map.entry(key.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}

/// Everything a run needs, in simulation units (ps, ps⁻¹).
#[derive(Debug, Clone)]
pub struct Plan {
    pub scenario: Scenario,
    pub model: Model,
    pub sender: NodeModel,
    pub target: DesignTarget,
    pub state: QubitAmplitudes,
    pub incoming: QubitAmplitudes,
    pub phi: f64,
    pub swap_delay: f64,
    pub link: Link,
    pub engine: Engine,
    pub out_dir: String,
}

fn node_defaults(c: &Option<NodeConfig>) -> NodeConfig {
    let c = c.clone().unwrap_or_default();
    NodeConfig {
        g_cav: c.g_cav.or(Some(Quantity::new(0.1, "meV"))),
        gamma: c.gamma.or(Some(Quantity::new(0.2, "meV"))),
        gamma0: c.gamma0.or(Some(Quantity::new(0.1, "ueV"))),
        gamma_trion: c.gamma_trion.or(Some(Quantity::new(3.0, "ueV"))),
        delta_zeeman: c.delta_zeeman.or(Some(Quantity::new(1.0, "meV"))),
        n_max: c.n_max.or(Some(3)),
        off_resonant: c.off_resonant.or(Some(true)),
    }
}

fn node_model(key: &str, c: &NodeConfig) -> Result<NodeModel, ConfigError> {
    let rate = |q: &Option<Quantity<Energy>>| q.as_ref().expect("materialised").rate();
    let params = SystemParams {
        g_cav: C64::new(rate(&c.g_cav), 0.0),
        gamma: rate(&c.gamma),
        gamma0: rate(&c.gamma0),
        gamma_trion: rate(&c.gamma_trion),
        delta_zeeman: rate(&c.delta_zeeman),
        n_max: c.n_max.expect("materialised"),
        omega_c_abs: None,
    }
    .validated()
    .or_else(|e| err(key, e))?;
    let options = NodeOptions { off_resonant: c.off_resonant.expect("materialised"), ..Default::default() };
    Ok(NodeModel::with_options(params, options))
}

fn qubit(key: &str, c: &QubitConfig) -> Result<QubitAmplitudes, ConfigError> {
    let z = |v: Option<[f64; 2]>| {
        let [re, im] = v.expect("materialised");
        C64::new(re, im)
    };
    QubitAmplitudes::normalized(z(c.c_g), z(c.c_e)).or_else(|e| err(key, e))
}

fn qubit_defaults(c: &Option<QubitConfig>, default: [[f64; 2]; 2]) -> QubitConfig {
    let c = c.clone().unwrap_or_default();
    QubitConfig { c_g: c.c_g.or(Some(default[0])), c_e: c.c_e.or(Some(default[1])) }
}

fn unused<T>(key: &str, section: &Option<T>, scenario: Scenario) -> Result<(), ConfigError> {
    match section {
        Some(_) => err(key, format!("not used by the {} scenario", scenario.name())),
        None => Ok(()),
    }
}

const GROUND: [[f64; 2]; 2] = [[1.0, 0.0], [0.0, 0.0]];
const EXCITED: [[f64; 2]; 2] = [[0.0, 0.0], [1.0, 0.0]];

/// Fills every default the scenario uses and builds the run plan. The
/// returned config is the materialised echo.
pub fn resolve(cfg: &ScenarioConfig, scenario: Scenario) -> Result<(ScenarioConfig, Plan), ConfigError> {
    if scenario == Scenario::Sweep {
        return err("scenario", "a sweep runs one point at a time");
    }
    let mut out = ScenarioConfig { scenario: Some(scenario), ..Default::default() };

    out.model = Some(match (scenario, cfg.model) {
        (Scenario::Send | Scenario::Receive, m) => m.unwrap_or(Model::Full),
        (Scenario::Design, None | Some(Model::Reduced)) => Model::Reduced,
        (Scenario::Design, Some(Model::Full)) => return err("model", "design is a reduced-model construction"),
        (_, None | Some(Model::Full)) => Model::Full,
        (_, Some(Model::Reduced)) => return err("model", format!("{} needs the full model", scenario.name())),
    });

    let node = node_defaults(&cfg.node);
    let sender = node_model("node", &node)?;
    out.node = Some(node.clone());
    let receiver = if scenario.two_node() {
        let r = node_defaults(&cfg.receiver.clone().or(Some(node)));
        let m = node_model("receiver", &r)?;
        out.receiver = Some(r);
        m
    } else {
        unused("receiver", &cfg.receiver, scenario)?;
        sender
    };

    // grid and target
    let g = cfg.grid.clone().unwrap_or_default();
    let half = if scenario.carrier() { 160.0 } else { 200.0 };
    let t_start = g.t_start.unwrap_or(Quantity::new(-half, "ps"));
    let t_end = g.t_end.unwrap_or(Quantity::new(half, "ps"));
    let n_steps = match g.n_steps {
        Some(n) => n,
        None => {
            let dt = sender.params.default_dt().min(receiver.params.default_dt());
            TimeGrid::with_max_step(t_start.ps(), t_end.ps(), dt).or_else(|e| err("grid", e))?.n_steps()
        }
    };
    let grid = TimeGrid::new(t_start.ps(), t_end.ps(), n_steps).or_else(|e| err("grid", e))?;
    out.grid = Some(GridConfig { t_start: Some(t_start), t_end: Some(t_end), n_steps: Some(n_steps) });

    let t = cfg.target.clone().unwrap_or_default();
    let shape = t.shape.unwrap_or(Shape::Sech);
    let width = t.width.unwrap_or(Quantity::new(if scenario.carrier() { 4.0 } else { 6.0 }, "/gamma"));
    let center = t.center.unwrap_or(Quantity::new(0.0, "ps"));
    let fixed = matches!(scenario, Scenario::Transfer | Scenario::Swap);
    let theta = match t.theta {
        Some(th) if fixed && th != FRAC_PI_2 => return err("target.theta", format!("{} always carries a full photon", scenario.name())),
        Some(th) => th,
        None => FRAC_PI_2,
    };
    let w = width.ps(sender.params.gamma);
    if !(w > 0.0) {
        return err("target.width", "must be positive");
    }
    let pulse = match shape {
        Shape::Sech => PulseShape::Sech { width: w, center: center.ps() },
        Shape::Gaussian => PulseShape::Gaussian { sigma: w, center: center.ps() },
    };
    let target = DesignTarget::analytic(pulse, grid, theta).or_else(|e| err("target", e))?;
    out.target = Some(TargetConfig { shape: Some(shape), width: Some(width), center: Some(center), theta: Some(theta) });

    // scenario sections
    let mut state = QubitAmplitudes::excited();
    if matches!(scenario, Scenario::Send | Scenario::Transfer) {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let default = if scenario == Scenario::Send { EXCITED } else { [[h, 0.0], [h, 0.0]] };
        let s = qubit_defaults(&cfg.state, default);
        state = qubit("state", &s)?;
        out.state = Some(s);
    } else {
        unused("state", &cfg.state, scenario)?;
    }

    let mut phi = 0.0;
    if scenario == Scenario::Entangle {
        phi = cfg.entangle.as_ref().and_then(|e| e.phi).unwrap_or(0.0);
        out.entangle = Some(EntangleConfig { phi: Some(phi) });
    } else {
        unused("entangle", &cfg.entangle, scenario)?;
    }

    let (mut incoming, mut swap_delay) = (QubitAmplitudes::ground(), 0.0);
    if scenario == Scenario::Swap {
        let s = cfg.swap.clone().unwrap_or_default();
        let stored = qubit_defaults(&s.stored, EXCITED);
        let inc = qubit_defaults(&s.incoming, GROUND);
        let delay = s.delay.unwrap_or(Quantity::new(200.0, "ps"));
        state = qubit("swap.stored", &stored)?;
        incoming = qubit("swap.incoming", &inc)?;
        swap_delay = delay.ps();
        out.swap = Some(SwapConfig { stored: Some(stored), incoming: Some(inc), delay: Some(delay) });
    } else {
        unused("swap", &cfg.swap, scenario)?;
    }

    let mut link = Link { sender, receiver, propagation_phase: 0.0, delay: 0.0 };
    let mut engine = Engine::Pure;
    if scenario.two_node() {
        let l = cfg.link.clone().unwrap_or_default();
        let name = l.engine.unwrap_or(EngineName::Master);
        let delay = l.delay.unwrap_or(Quantity::new(0.0, "ps"));
        link.propagation_phase = l.propagation_phase.unwrap_or(0.0);
        link.delay = delay.ps();
        if link.delay < 0.0 {
            return err("link.delay", "must not be negative");
        }
        let recycle = match name {
            EngineName::Pure if l.recycle.is_some() => return err("link.recycle", "the pure engine has no jumps to recycle"),
            EngineName::Pure => None,
            _ => Some(l.recycle.unwrap_or(false)),
        };
        engine = match name {
            EngineName::Pure => Engine::Pure,
            EngineName::Master => Engine::Master { recycle: recycle.unwrap_or(false) },
            EngineName::Trajectories => {
                let tr = cfg.trajectories.clone().unwrap_or_default();
                let (n_traj, seed) = (tr.n_traj.unwrap_or(2000), tr.seed.unwrap_or(1));
                if n_traj == 0 {
                    return err("trajectories.n_traj", "must be at least 1");
                }
                out.trajectories = Some(TrajectoryConfig { n_traj: Some(n_traj), seed: Some(seed) });
                Engine::Trajectories(TrajectoryOptions { n_traj, seed, recycle: recycle.unwrap_or(false) })
            }
        };
        if name != EngineName::Trajectories {
            unused("trajectories", &cfg.trajectories, scenario)?;
        }
        out.link = Some(LinkConfig { engine: Some(name), recycle, propagation_phase: Some(link.propagation_phase), delay: Some(delay) });
    } else {
        unused("link", &cfg.link, scenario)?;
        unused("trajectories", &cfg.trajectories, scenario)?;
    }

    let out_dir = cfg.output.as_ref().and_then(|o| o.dir.clone()).unwrap_or_else(|| "out".to_string());
    out.output = Some(OutputConfig { dir: Some(out_dir.clone()) });

    let model = out.model.expect("set above");
    Ok((out, Plan { scenario, model, sender, target, state, incoming, phi, swap_delay, link, engine, out_dir }))
}
