//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6};
use std::process::ExitCode;
use std::time::Instant;

use raman_core::designer::{design_receive_pulse, design_send_pulse, DesignTarget};
use raman_core::envelope::{ComplexEnvelope, Wavepacket};
use raman_core::error::Error;
use raman_core::grid::TimeGrid;
use raman_core::metrics::mixing_angle_entropy;
use raman_core::network::protocols::{entangle_protocol, transfer_protocol, Engine, Link, ProtocolResult};
use raman_core::network::trajectories::TrajectoryOptions;
use raman_core::node::{NodeModel, SendOutcome, SendReference};
use raman_core::params::SystemParams;
use raman_core::reduced::{integrate_reduced, ReducedState};
use raman_core::state::QubitAmplitudes;
use raman_core::C64;

struct Check {
    ok: bool,
    notes: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Self { ok: true, notes: Vec::new() }
    }

    fn expect(&mut self, cond: bool, note: String) {
        if !cond {
            self.ok = false;
            self.notes.push(format!("!{note}"));
        } else {
            self.notes.push(note);
        }
    }
}

fn report(id: &str, title: &str, start: Instant, check: Check) -> bool {
    let status = if check.ok { "PASS" } else { "FAIL" };
    println!("{id} {status} {title} [{:.1} s] {}", start.elapsed().as_secs_f64(), check.notes.join("; "));
    check.ok
}

fn params() -> SystemParams {
    SystemParams::default()
}

fn send_grid(p: &SystemParams) -> TimeGrid {
    TimeGrid::with_max_step(-200.0, 200.0, p.default_dt()).unwrap()
}

fn carrier(p: &SystemParams) -> DesignTarget {
    let grid = TimeGrid::with_max_step(-160.0, 160.0, p.default_dt()).unwrap();
    DesignTarget::sech(grid, p.gamma, 4.0, 0.0, FRAC_PI_2).unwrap()
}

fn send(p: SystemParams, grid: TimeGrid, q: QubitAmplitudes) -> (SendOutcome, ComplexEnvelope) {
    let target = DesignTarget::sech(grid, p.gamma, 6.0, 0.0, FRAC_PI_2).unwrap();
    let d = design_send_pulse(&target, &p).unwrap();
    let reference = SendReference { packet: target.shape().clone(), theta: FRAC_PI_2, phi: d.predicted_phase_phi };
    (NodeModel::new(p).send(q, &d.omega, Some(&reference)).unwrap(), d.omega)
}

fn ac1() -> (bool, f64) {
    let start = Instant::now();
    let p = params();
    let mut c = Check::new();
    let mut worst_defect: f64 = 0.0;
    for theta in [FRAC_PI_6, FRAC_PI_4, FRAC_PI_2] {
        let t0 = Instant::now();
        let target = DesignTarget::sech(send_grid(&p), p.gamma, 6.0, 0.0, theta).unwrap();
        let omega = design_send_pulse(&target, &p).unwrap().omega;
        let run = integrate_reduced(&omega, None, ReducedState::excited(), &p).unwrap();
        let overlap = target.shape().envelope().inner(&run.alpha_out).unwrap().norm_sqr() / run.emitted;
        let secs = t0.elapsed().as_secs_f64();
        worst_defect = worst_defect.max(run.norm_defect);
        c.expect(overlap >= 0.999, format!("θ={theta:.4} overlap {overlap:.6}"));
        c.expect((run.emitted - theta.sin().powi(2)).abs() <= 1e-3, format!("n={:.6}", run.emitted));
        c.expect(secs < 1.0, format!("{secs:.2} s"));
    }
    (report("AC1", "designer round trip (reduced model)", start, c), worst_defect)
}

fn ac2() -> (bool, SendOutcome, ComplexEnvelope) {
    let start = Instant::now();
    let p = params();
    let (out, omega) = send(p, send_grid(&p), QubitAmplitudes::equal_superposition());
    let mut c = Check::new();
    let f = out.pulse_fidelity.unwrap();
    c.expect((f - 0.9907).abs() <= 0.01, format!("pulse fidelity {f:.5}"));
    c.expect(out.p_error <= 0.002, format!("p_error {:.3e} (free-space + cavity loss {:.3e})", out.p_error, out.p_loss));
    let overall = out.overall_fidelity.unwrap();
    c.expect(overall >= 0.99, format!("overall {overall:.5}"));
    c.expect(out.operation_time() <= 300.0, format!("window {:.1} ps", out.operation_time()));
    c.expect(start.elapsed().as_secs_f64() < 30.0, "< 30 s".into());
    (report("AC2", "full-model pulse generation", start, c), out, omega)
}

fn ac3(sent: &SendOutcome) -> bool {
    let start = Instant::now();
    let p = params();
    let packet = Wavepacket::from_unnormalized(sent.one_photon.clone()).unwrap();
    let omega = design_receive_pulse(&packet.with_photon_number(1.0).unwrap(), &p).unwrap().omega;
    let out = NodeModel::new(p).receive(&packet, &omega).unwrap();
    let mut c = Check::new();
    c.expect(out.overall_fidelity >= 0.99, format!("overall {:.5}", out.overall_fidelity));
    c.notes.push(format!("absorption fidelity {:.5}", out.absorption_fidelity));
    c.expect(start.elapsed().as_secs_f64() < 60.0, "< 60 s".into());
    report("AC3", "receive with time-reversed control", start, c)
}

fn ac4() -> (bool, ProtocolResult) {
    let start = Instant::now();
    let p = params();
    let r = transfer_protocol(QubitAmplitudes::equal_superposition(), &carrier(&p), &Link::identical(p), &Engine::Master { recycle: false }).unwrap();
    let mut c = Check::new();
    c.expect(r.fidelity >= 0.98, format!("fidelity {:.5}, leak {:.4}", r.fidelity, r.p_leak));
    c.expect(start.elapsed().as_secs_f64() < 300.0, "master equation n_max=3 < 5 min".into());
    (report("AC4", "state transfer", start, c), r)
}

fn ac5() -> bool {
    let start = Instant::now();
    let p = params();
    let r = entangle_protocol(FRAC_PI_4, 0.0, &carrier(&p), &Link::identical(p), &Engine::Pure).unwrap();
    let ge = r.amplitude("g1e2").unwrap().norm();
    let eg = r.amplitude("e1g2").unwrap().norm();
    let s = r.entropy.unwrap();
    let mut c = Check::new();
    c.expect((ge - 0.6908).abs() <= 0.01 && (eg - 0.7100).abs() <= 0.01, format!("|g,e| {ge:.4} |e,g| {eg:.4}"));
    c.expect(r.p_leak <= 0.02, format!("leak {:.4}", r.p_leak));
    c.expect((s - 0.9995).abs() <= 0.002, format!("entropy {s:.5}"));
    c.expect((r.fidelity - 0.9905).abs() <= 0.005, format!("fidelity {:.5}", r.fidelity));
    report("AC5", "remote entanglement", start, c)
}

fn ac6(n3: &SendOutcome, master: &ProtocolResult) -> bool {
    let start = Instant::now();
    let p = params();
    let mut c = Check::new();

    // (a) Fock truncation
    let (n4, _) = send(SystemParams { n_max: 4, ..p }, send_grid(&p), QubitAmplitudes::equal_superposition());
    let metrics = |o: &SendOutcome| {
        [o.p_error, o.p_loss, o.phi_g, o.pulse_fidelity.unwrap(), o.overall_fidelity.unwrap(), o.amp_vacuum.norm(), o.photon_number()]
    };
    let shift = metrics(n3).iter().zip(metrics(&n4)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    c.expect(shift < 1e-4, format!("(a) max metric change n_max 3→4 {shift:.1e}"));

    // (b) Zeeman sweep on one grid fine enough for 10 meV
    let deltas = [1.0, 2.0, 5.0, 10.0];
    let fine = send_grid(&SystemParams { delta_zeeman: 10.0 * p.delta_zeeman, ..p });
    let errors: Vec<f64> = deltas
        .iter()
        .map(|s| send(SystemParams { delta_zeeman: s * p.delta_zeeman, ..p }, fine, QubitAmplitudes::excited()).0.p_error)
        .collect();
    let monotone = errors.windows(2).all(|w| w[1] < w[0]);
    c.expect(monotone, format!("(b) p_error over Δ {deltas:?} meV: {}", errors.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>().join(", ")));

    // (c) trajectories vs master equation
    let q = QubitAmplitudes::equal_superposition();
    let run = |n| {
        let e = Engine::Trajectories(TrajectoryOptions { n_traj: n, seed: 1, recycle: false });
        transfer_protocol(q, &carrier(&p), &Link::identical(p), &e).unwrap()
    };
    // at ~2% leakage 500 runs see only ~10 jumps, too few to resolve σ itself
    let (small, large) = (run(2000), run(8000));
    let se = small.fidelity_std_error.unwrap();
    c.expect((small.fidelity - master.fidelity).abs() <= 3.0 * se, format!("(c) trajectories {:.5} ± {se:.5} vs master {:.5}", small.fidelity, master.fidelity));
    let ratio = small.p_leak_std_error.unwrap() / large.p_leak_std_error.unwrap();
    c.expect((ratio - 2.0).abs() <= 0.4, format!("σ(2000)/σ(8000) = {ratio:.3}"));
    report("AC6", "convergence properties", start, c)
}

fn ac7(defect: f64, omega: &ComplexEnvelope) -> bool {
    let start = Instant::now();
    let p = params();
    let mut c = Check::new();
    c.expect(defect <= 1e-6, format!("reduced norm defect {defect:.1e}"));

    let node = NodeModel::new(p);
    let inputs = [
        QubitAmplitudes::normalized(C64::new(0.3, 0.2), C64::new(0.8, 0.0)).unwrap(),
        QubitAmplitudes::normalized(C64::new(-0.9, 0.1), C64::new(0.1, 0.4)).unwrap(),
        QubitAmplitudes::normalized(C64::new(0.5, -0.5), C64::new(0.0, 0.7)).unwrap(),
    ];
    let phis: Vec<f64> = inputs.iter().map(|q| node.send(*q, omega, None).unwrap().phi_g).collect();
    let spread = phis.iter().fold(f64::MIN, |a, &b| a.max(b)) - phis.iter().fold(f64::MAX, |a, &b| a.min(b));
    c.expect(spread <= 1e-8, format!("φ_g spread {spread:.1e}"));

    let r = entangle_protocol(FRAC_PI_4, 0.0, &carrier(&p), &Link::identical(p), &Engine::Pure).unwrap();
    let theta = r.amplitude("g1e2").unwrap().norm().atan2(r.amplitude("e1g2").unwrap().norm());
    let gap = (r.entropy.unwrap() - mixing_angle_entropy(theta)).abs();
    c.expect(gap <= 1e-6, format!("entropy vs closed form {gap:.1e}"));

    let squeezed = DesignTarget::sech(send_grid(&p), p.gamma, 6.0 / 5.0, 0.0, FRAC_PI_2).unwrap();
    let infeasible = matches!(design_send_pulse(&squeezed, &p), Err(Error::Infeasible { .. }));
    c.expect(infeasible, "5× compressed target infeasible".into());

    let e = Engine::Trajectories(TrajectoryOptions { n_traj: 200, seed: 42, recycle: false });
    let q = QubitAmplitudes::equal_superposition();
    let a = transfer_protocol(q, &carrier(&p), &Link::identical(p), &e).unwrap();
    let b = transfer_protocol(q, &carrier(&p), &Link::identical(p), &e).unwrap();
    let same = format!("{:?}", a.rho_final.data()) == format!("{:?}", b.rho_final.data()) && a.fidelity.to_bits() == b.fidelity.to_bits();
    c.expect(same, "same seed → identical output".into());
    report("AC7", "invariant suite", start, c)
}

fn main() -> ExitCode {
    let (ok1, defect) = ac1();
    let (ok2, sent, omega) = ac2();
    let ok3 = ac3(&sent);
    let (ok4, master) = ac4();
    let ok5 = ac5();
    let ok6 = ac6(&sent, &master);
    let ok7 = ac7(defect, &omega);
    if [ok1, ok2, ok3, ok4, ok5, ok6, ok7].iter().all(|&b| b) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
