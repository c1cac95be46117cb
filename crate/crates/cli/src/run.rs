//! Scenario dispatch: one plan in, time series and metrics out.

use raman_core::designer::{design_receive_pulse, design_send_pulse, DesignResult};
use raman_core::network::protocols::{entangle_protocol, swap_protocol, transfer_protocol, ProtocolResult, SwapSchedule};
use raman_core::node::SendReference;
use raman_core::reduced::{integrate_reduced, reduced_receive, ReducedState};
use raman_core::units::rate_to_energy;
use raman_core::{ComplexEnvelope, Error, TimeGrid, C64};
use serde_json::{json, Map, Value};

use crate::config::{Model, Plan, Scenario};

pub enum Signal {
    Complex(String, Vec<C64>),
    Real(String, Vec<f64>),
}

pub struct Outcome {
    pub grid: TimeGrid,
    pub signals: Vec<Signal>,
    pub metrics: Map<String, Value>,
}

/// Why a run stopped. Maps onto the process exit code.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Infeasible(String),
    Runtime(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Runtime(_) => 1,
            Failure::Infeasible(_) => 2,
            Failure::Config(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Infeasible(m) | Failure::Runtime(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Infeasible { .. } => Failure::Infeasible(e.to_string()),
            Error::InvalidParams(_) | Error::InvalidGrid(_) => Failure::Config(e.to_string()),
            Error::ScheduleViolation(_) => Failure::Config(format!("swap.delay: {e}")),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

fn complex(z: C64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

fn signal(name: &str, e: &ComplexEnvelope) -> Signal {
    Signal::Complex(name.to_string(), e.values().to_vec())
}

struct Metrics(Map<String, Value>);

impl Metrics {
    fn new(plan: &Plan) -> Self {
        let mut m = Map::new();
        m.insert("scenario".into(), json!(plan.scenario.name()));
        Self(m)
    }

    fn put(&mut self, key: &str, v: impl Into<Value>) {
        self.0.insert(key.to_string(), v.into());
    }

    fn opt(&mut self, key: &str, v: Option<f64>) {
        if let Some(x) = v {
            self.put(key, x);
        }
    }

    fn design(&mut self, d: &DesignResult) {
        self.put("feasibility_margin", d.feasibility_margin);
        self.put("peak_rabi_mev", rate_to_energy(d.peak_rabi()));
        self.put("predicted_phase_phi", d.predicted_phase_phi);
        if let Some(c) = &d.clip {
            self.put("design_clip_time_ps", c.time);
        }
    }
}

/// |⟨target|out⟩| / ‖out‖, omitted when nothing was emitted.
fn shape_fidelity(target: &ComplexEnvelope, out: &ComplexEnvelope) -> Result<Option<f64>, Error> {
    let n = out.norm_sq();
    let t = target.norm_sq();
    if n == 0.0 || t == 0.0 {
        return Ok(None);
    }
    Ok(Some(target.inner(out)?.norm() / (n * t).sqrt()))
}

pub fn run(plan: &Plan) -> Result<Outcome, Failure> {
    match plan.scenario {
        Scenario::Design => design(plan),
        Scenario::Send => send(plan),
        Scenario::Receive => receive(plan),
        Scenario::Transfer | Scenario::Entangle => link(plan),
        Scenario::Swap => swap(plan),
        Scenario::Sweep => Err(Failure::Config("scenario: a sweep point cannot itself be a sweep".into())),
    }
}

fn design(plan: &Plan) -> Result<Outcome, Failure> {
    let p = &plan.sender.params;
    let d = design_send_pulse(&plan.target, p)?;
    // the reduced model is the closed-form inverse's own oracle
    let check = integrate_reduced(&d.omega, None, ReducedState::excited(), p)?;
    let target = plan.target.shape().field();
    let mut m = Metrics::new(plan);
    m.design(&d);
    m.put("model", "reduced");
    m.put("theta", plan.target.theta());
    m.put("photon_number", check.emitted);
    m.put("target_photon_number", plan.target.shape().mean_photon_number());
    m.opt("pulse_fidelity", shape_fidelity(&target, &check.alpha_out)?);
    m.put("norm_defect", check.norm_defect);
    let (a, b) = d.active_window(0.01);
    m.put("active_window_ps", json!([a, b]));
    Ok(Outcome {
        grid: *d.grid(),
        signals: vec![
            signal("alpha_out", &check.alpha_out),
            signal("alpha_target", &target),
            signal("beta_e", &d.beta_e),
            signal("beta_c", &d.beta_c),
            signal("omega", &d.omega),
        ],
        metrics: m.0,
    })
}

fn send(plan: &Plan) -> Result<Outcome, Failure> {
    let node = &plan.sender;
    let d = design_send_pulse(&plan.target, &node.params)?;
    let target = plan.target.shape().field();
    let mut m = Metrics::new(plan);
    m.design(&d);
    m.put("theta", plan.target.theta());
    let q = plan.state;
    if plan.model == Model::Reduced {
        let init = ReducedState { beta_e: q.c_e, ..ReducedState::ZERO };
        let run = integrate_reduced(&d.omega, None, init, &node.params)?;
        m.put("model", "reduced");
        m.put("photon_number", run.emitted);
        m.opt("pulse_fidelity", shape_fidelity(&target, &run.alpha_out)?);
        m.put("norm_defect", run.norm_defect);
        let signals = vec![
            signal("alpha_out", &run.alpha_out),
            signal("alpha_target", &target),
            signal("beta_e", &run.envelope_of(|s| s.beta_e)),
            signal("beta_c", &run.envelope_of(|s| s.beta_c)),
            signal("omega", &d.omega),
        ];
        return Ok(Outcome { grid: *d.grid(), signals, metrics: m.0 });
    }

    let reference = SendReference { packet: plan.target.shape().clone(), theta: plan.target.theta(), phi: d.predicted_phase_phi };
    let o = node.send(q, &d.omega, Some(&reference))?;
    let drift = node.phase_drift(&d.omega)?;
    m.put("model", "full");
    m.put("photon_number", o.photon_number());
    m.opt("pulse_fidelity", o.pulse_fidelity);
    m.opt("pulse_overlap", o.pulse_overlap);
    m.opt("overall_fidelity", o.overall_fidelity);
    m.opt("average_fidelity", o.average_fidelity);
    m.put("p_error", o.p_error);
    m.put("p_loss", o.p_loss);
    m.put("p_error_total", o.p_error_total());
    m.put("phi_g", o.phi_g);
    m.put("amp_vacuum", complex(o.amp_vacuum));
    m.put("amp_excited", complex(o.amp_excited));
    m.put("truncation_warning", o.truncation_warning);
    m.put("beyond_weight", o.beyond_weight);
    m.put("operation_window_ps", json!([o.operation_window.0, o.operation_window.1]));
    m.put("operation_time_ps", o.operation_time());
    Ok(Outcome {
        grid: *d.grid(),
        signals: vec![
            signal("alpha_out", &o.one_photon),
            signal("alpha_target", &target),
            signal("beta_e", &o.beta_e),
            signal("beta_c", &o.beta_c),
            signal("omega", &node.gate(&d.omega)),
            Signal::Real("phi_g".into(), drift.series),
        ],
        metrics: m.0,
    })
}

fn receive(plan: &Plan) -> Result<Outcome, Failure> {
    let node = &plan.sender;
    let incoming = plan.target.shape();
    // the pulse is designed for one photon of this shape
    let d = design_receive_pulse(&incoming.with_photon_number(1.0)?, &node.params)?;
    let mut m = Metrics::new(plan);
    m.design(&d);
    m.put("photon_number", incoming.mean_photon_number());
    let alpha_in = incoming.field();
    if plan.model == Model::Reduced {
        let run = reduced_receive(incoming, &d.omega, &node.params)?;
        m.put("model", "reduced");
        m.put("absorption", run.absorption());
        m.put("reflection", run.reflection());
        m.put("norm_defect", run.norm_defect);
        let signals = vec![
            signal("alpha_in", &alpha_in),
            signal("alpha_out", &run.alpha_out),
            signal("beta_e", &run.envelope_of(|s| s.beta_e)),
            signal("beta_c", &run.envelope_of(|s| s.beta_c)),
            signal("omega", &d.omega),
        ];
        return Ok(Outcome { grid: *d.grid(), signals, metrics: m.0 });
    }
    let o = node.receive(incoming, &d.omega)?;
    m.put("model", "full");
    m.put("absorption", o.absorption);
    m.put("reflection", o.reflection);
    m.put("loss", o.loss);
    m.put("residual", o.residual);
    m.put("phi_g", o.phi_g);
    m.put("absorption_fidelity", o.absorption_fidelity);
    m.put("overall_fidelity", o.overall_fidelity);
    m.put("average_fidelity", o.average_fidelity);
    m.put("amp_g", complex(o.amp_g));
    m.put("amp_e", complex(o.amp_e));
    Ok(Outcome {
        grid: *d.grid(),
        signals: vec![signal("alpha_in", &alpha_in), signal("beta_e", &o.beta_e), signal("omega", &node.gate(&d.omega))],
        metrics: m.0,
    })
}

fn protocol_metrics(m: &mut Metrics, r: &ProtocolResult) {
    m.put("model", "full");
    m.put("fidelity", r.fidelity);
    m.put("p_leak", r.p_leak);
    m.opt("fidelity_std_error", r.fidelity_std_error);
    m.opt("p_leak_std_error", r.p_leak_std_error);
    m.opt("entropy", r.entropy);
    m.put("compensation_phase", r.compensation_phase);
    let named: Vec<Value> = r.amplitudes.iter().map(|a| json!({ "label": a.label, "re": a.value.re, "im": a.value.im })).collect();
    m.put("amplitudes", named);
    m.put("target", r.target.iter().map(|z| complex(*z)).collect::<Vec<_>>());
    let n = r.rho_final.dim();
    let rows: Vec<Value> = (0..n).map(|i| (0..n).map(|j| json!([r.rho_final.get(i, j).re, r.rho_final.get(i, j).im])).collect()).collect();
    m.put("rho_final", rows);
}

fn pulses(r: &ProtocolResult) -> Vec<Signal> {
    r.pulses.iter().map(|(name, e)| signal(name, e)).collect()
}

fn link(plan: &Plan) -> Result<Outcome, Failure> {
    let r = if plan.scenario == Scenario::Transfer {
        transfer_protocol(plan.state, &plan.target, &plan.link, &plan.engine)?
    } else {
        entangle_protocol(plan.target.theta(), plan.phi, &plan.target, &plan.link, &plan.engine)?
    };
    let mut m = Metrics::new(plan);
    protocol_metrics(&mut m, &r);
    Ok(Outcome { grid: r.grid, signals: pulses(&r), metrics: m.0 })
}

fn swap(plan: &Plan) -> Result<Outcome, Failure> {
    let s = swap_protocol(plan.state, plan.incoming, &plan.target, SwapSchedule { delay: plan.swap_delay }, &plan.sender)?;
    let mut m = Metrics::new(plan);
    protocol_metrics(&mut m, &s.protocol);
    m.put("spin_fidelity", s.spin_fidelity);
    m.put("photon_fidelity", s.photon_fidelity);
    m.put("send_window_ps", json!([s.send_window.0, s.send_window.1]));
    m.put("receive_window_ps", json!([s.receive_window.0, s.receive_window.1]));
    Ok(Outcome { grid: s.protocol.grid, signals: pulses(&s.protocol), metrics: m.0 })
}
