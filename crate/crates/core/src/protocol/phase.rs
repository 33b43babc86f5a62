//! Sending a phase the sender does not know, encoded in a `K`-level qudit.
//!
//! The encoding qudit `d` is prepared by a phase provider and handed to the
//! sender of each use in turn. Each use has its own sender and its own pair
//! of receivers.

#[allow(unused_imports)] // std, when linked, provides these methods inherently
use num_traits::Float;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::library::gates::{permutation, z_basis};
use crate::library::{controlled_shift, correction_gate, fourier_basis, make_broadcast_state, BroadcastSpec};
use crate::linalg::{self, Matrix, C64, ZERO};
use crate::tensor::{Povm, Subsystem, StateVector, SubsystemId, ALGEBRAIC_TOL, CHAINED_TOL};

use super::common::{product, reduced, reduced_fidelity, strs, OVERLAP_BOUND};
use super::session::{LiveBranch, Mode, OutcomeId, ProtocolTranscript, Recipient, Role, Session, Verdict};

const PROVIDER: &str = "Dave";
const ENCODING: &str = "d";

/// `(1/sqrt(K)) sum_j e^{i j theta} |j>` on subsystem `d`.
pub fn encoding_state(theta: f64, k_dim: usize) -> Result<StateVector> {
    encoding_tail(theta, k_dim, 0)
}

/// The encoding state restricted to levels `from..K`, renormalized.
pub fn encoding_tail(theta: f64, k_dim: usize, from: usize) -> Result<StateVector> {
    let amps = (0..k_dim).map(|j| if j >= from { linalg::cis(j as f64 * theta) } else { ZERO }).collect();
    StateVector::new(alloc::vec![Subsystem::new(ENCODING, k_dim)], amps)
        .map_err(|_| Error::InvalidParameter(format!("no levels at or above {from} in dimension {k_dim}")))
}

fn primes(u: usize) -> String {
    "'".repeat(u)
}

/// Names and labels for one use of the encoding state.
struct Use {
    sender: String,
    qudit: String,
    receivers: Vec<String>,
    labels: Vec<String>,
}

impl Use {
    fn new(u: usize, n: usize) -> Self {
        let p = primes(u);
        Self {
            sender: format!("Alice{p}"),
            qudit: format!("a{p}"),
            receivers: (1..=n).map(|l| format!("Bob{l}{p}")).collect(),
            labels: (1..=n).map(|l| format!("b{l}{p}")).collect(),
        }
    }
}

fn setup(protocol: &str, mode: Mode, theta: f64, k_dim: usize, uses: &[Use]) -> Result<Session> {
    let mut s = Session::new(protocol, mode);
    s.add_party(PROVIDER, Role::PhaseProvider)?;
    for u in uses {
        s.add_party(u.sender.as_str(), Role::Sender)?;
        for r in &u.receivers {
            s.add_party(r.as_str(), Role::Receiver)?;
        }
    }
    s.prepare(PROVIDER, &encoding_state(theta, k_dim)?)?;
    s.transfer(PROVIDER, &uses[0].sender, ENCODING)?;
    Ok(s)
}

/// Prepares the template for one use, hands out the receiver qubits and
/// imprints the encoded phase on the sender qudit through a controlled shift.
/// `reflect` first relabels the qudit to count receivers in `|1>`.
fn imprint(s: &mut Session, u: &Use, alpha: C64, beta: C64, k_dim: usize, reflect: bool) -> Result<()> {
    let n = u.labels.len();
    let spec = BroadcastSpec::new(1, n, alpha, beta)?;
    let template = make_broadcast_state(&spec)?;
    let mut names: Vec<&str> = alloc::vec![u.qudit.as_str()];
    names.extend(strs(&u.labels));
    s.prepare(&u.sender, &template.with_labels(&names)?)?;
    for (l, r) in u.labels.iter().zip(&u.receivers) {
        s.transfer(&u.sender, r, l)?;
    }
    if reflect {
        let perm: Vec<usize> = (0..=n).map(|k| n - k).collect();
        s.apply(&u.sender, &permutation("reflect", &perm)?, &[&u.qudit])?;
    }
    s.apply(&u.sender, &controlled_shift(n + 1, k_dim, 1)?, &[&u.qudit, ENCODING])?;
    Ok(())
}

/// Fourier measurement of the sender qudit, broadcast, receiver corrections.
/// With `reflect` the outcome phase sits on `|1>`, so the inverse phase is
/// applied to `|0>` instead (equal up to a global phase).
fn release(s: &mut Session, u: &Use, reflect: bool) -> Result<OutcomeId> {
    let d = u.labels.len() + 1;
    let id = s.measure(&u.sender, &u.qudit, fourier_basis(SubsystemId(0), d)?, true)?;
    s.send(&u.sender, Recipient::Broadcast, &[id])?;
    for (l, r) in u.labels.iter().zip(&u.receivers) {
        s.apply_with(r, "correction", &[l], &[id], |v| {
            let sum = if reflect { (d - v[0] % d) % d } else { v[0] };
            correction_gate(d, sum).map(Some)
        })?;
    }
    Ok(id)
}

/// Restricted angle `2 pi k / K`: every receiver of every use ends with
/// `e^{-2 pi i k/K} alpha|0> + beta|1>` and `d` is returned unchanged.
pub fn send_phase_restricted(
    alpha: C64,
    beta: C64,
    k: usize,
    k_dim: usize,
    receivers: usize,
    uses: usize,
    mode: Mode,
) -> Result<ProtocolTranscript> {
    if k >= k_dim {
        return Err(Error::OutOfRange { what: "encoded phase index", value: k as i64, bound: k_dim as i64 - 1 });
    }
    if receivers + 1 > k_dim {
        return Err(Error::InvalidParameter(format!(
            "encoding dimension {k_dim} must be at least the sender dimension {}",
            receivers + 1
        )));
    }
    if uses == 0 {
        return Err(Error::InvalidParameter("at least one use is required".into()));
    }
    let theta = 2.0 * PI * k as f64 / k_dim as f64;
    let plan: Vec<Use> = (0..uses).map(|u| Use::new(u, receivers)).collect();
    let mut s = setup("phase-restricted", mode, theta, k_dim, &plan)?;
    for (i, u) in plan.iter().enumerate() {
        imprint(&mut s, u, alpha, beta, k_dim, false)?;
        release(&mut s, u, false)?;
        if let Some(next) = plan.get(i + 1) {
            s.transfer(&u.sender, &next.sender, ENCODING)?;
        }
    }
    let q = [alpha * linalg::cis(-theta), beta];
    let targets = plan.iter().map(|u| product(&u.labels, q)).collect::<Result<Vec<_>>>()?;
    let phi = encoding_state(theta, k_dim)?;
    let bound = 1.0 - ALGEBRAIC_TOL;
    s.finish(|b| {
        let mut v = Vec::new();
        for (i, t) in targets.iter().enumerate() {
            v.push(Verdict::at_least(format!("use {} receiver fidelity", i + 1), reduced_fidelity(b.state(), t)?, bound));
        }
        v.push(Verdict::at_least("encoding fidelity", reduced_fidelity(b.state(), &phi)?, bound));
        Ok((Some(b.state().clone()), v))
    })
}

/// How the sender treats the encoding qudit after a use with a general angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneralVariant {
    /// Computational-basis measurement; success when the outcome is at least 2.
    Destructive,
    /// Two-outcome projector onto levels `>= 2u` on use `u`.
    Projector,
    /// No measurement; receivers get approximate states.
    Approximate,
}

/// `alpha|0> + beta e^{-i theta}|1>` up to the phase that makes it symmetric.
pub fn general_target(alpha: C64, beta: C64, theta: f64) -> [C64; 2] {
    [alpha * linalg::cis(theta / 2.0), beta * linalg::cis(-theta / 2.0)]
}

/// Closed form of one receiver's reduced state after an unmeasured use.
pub fn approximate_receiver_state(alpha: C64, beta: C64, theta: f64, k_dim: usize) -> Matrix {
    let kf = k_dim as f64;
    let q = general_target(alpha, beta, theta);
    let mut rho = linalg::outer(&q) * linalg::r((kf - 2.0) / kf);
    let off = alpha * beta.conj() * linalg::cis(theta) * (linalg::ONE + linalg::cis(-kf * theta));
    let extra = linalg::from_rows(
        2,
        2,
        &[linalg::r(2.0 * alpha.norm_sqr()), off, off.conj(), linalg::r(2.0 * beta.norm_sqr())],
    );
    rho += extra * linalg::r(1.0 / kf);
    rho
}

/// Closed form of the encoding fidelity after one unmeasured use.
pub fn approximate_encoding_fidelity(alpha: C64, beta: C64, theta: f64, k_dim: usize) -> f64 {
    let kf = k_dim as f64;
    1.0 - 4.0 * beta.norm_sqr() * (1.0 - (kf * theta).cos()) * (kf - 2.0 + alpha.norm_sqr()) / (kf * kf)
}

/// Bound on the noise part of the two-use receiver state, in units of `1/K`.
pub const NOISE_CONSTANT: f64 = 4.0;

/// General angle, two receivers per use.
pub fn send_phase_general(
    alpha: C64,
    beta: C64,
    theta: f64,
    k_dim: usize,
    variant: GeneralVariant,
    uses: usize,
    mode: Mode,
) -> Result<ProtocolTranscript> {
    if k_dim < 3 {
        return Err(Error::OutOfRange { what: "encoding dimension", value: k_dim as i64, bound: 3 });
    }
    match (variant, uses) {
        (_, 0) => return Err(Error::InvalidParameter("at least one use is required".into())),
        (GeneralVariant::Destructive, u) if u > 1 => {
            return Err(Error::InvalidParameter("a destroyed encoding state cannot be reused".into()))
        }
        (GeneralVariant::Projector, u) if k_dim < 2 * u + 1 => {
            return Err(Error::InvalidParameter(format!("{u} projector uses need K >= {}", 2 * u + 1)))
        }
        (GeneralVariant::Approximate, u) if u > 2 => {
            return Err(Error::InvalidParameter("the approximate variant is analysed for at most two uses".into()))
        }
        _ => {}
    }
    let plan: Vec<Use> = (0..uses).map(|u| Use::new(u, 2)).collect();
    let name = match variant {
        GeneralVariant::Destructive => "phase-general",
        GeneralVariant::Projector => "phase-projector",
        GeneralVariant::Approximate => "phase-approx",
    };
    let mut s = setup(name, mode, theta, k_dim, &plan)?;
    let mut checks: Vec<OutcomeId> = Vec::new();
    for (i, u) in plan.iter().enumerate() {
        imprint(&mut s, u, alpha, beta, k_dim, true)?;
        release(&mut s, u, true)?;
        match variant {
            GeneralVariant::Destructive => {
                let id = s.measure(&u.sender, ENCODING, z_basis(SubsystemId(0), k_dim), true)?;
                s.send(&u.sender, Recipient::Broadcast, &[id])?;
                checks.push(id);
            }
            GeneralVariant::Projector => {
                let q = upper_projector(k_dim, 2 * (i + 1));
                let id = s.measure(&u.sender, ENCODING, Povm::binary_projector("Q", SubsystemId(0), q)?, false)?;
                s.send(&u.sender, Recipient::Broadcast, &[id])?;
                checks.push(id);
            }
            GeneralVariant::Approximate => {}
        }
        if let Some(next) = plan.get(i + 1) {
            s.transfer(&u.sender, &next.sender, ENCODING)?;
        }
    }

    let q = general_target(alpha, beta, theta);
    let pair_targets = plan.iter().map(|u| product(&u.labels, q)).collect::<Result<Vec<_>>>()?;
    let success = |b: &LiveBranch, upto: usize| -> bool {
        checks.iter().take(upto).all(|&id| match variant {
            GeneralVariant::Destructive => b.outcome(id) >= 2,
            _ => b.outcome(id) == 1,
        })
    };

    let mut t = match variant {
        GeneralVariant::Destructive | GeneralVariant::Projector => s.finish(|b| {
            let mut v = Vec::new();
            for (i, target) in pair_targets.iter().enumerate() {
                if success(b, i + 1) {
                    let f = reduced_fidelity(b.state(), target)?;
                    v.push(Verdict::at_least(format!("use {} receiver fidelity", i + 1), f, OVERLAP_BOUND));
                }
            }
            if variant == GeneralVariant::Projector && success(b, uses) {
                let rest = encoding_tail(theta, k_dim, 2 * uses)?;
                v.push(Verdict::at_least("residual encoding fidelity", reduced_fidelity(b.state(), &rest)?, OVERLAP_BOUND));
            }
            Ok((Some(b.state().clone()), v))
        })?,
        GeneralVariant::Approximate => {
            let rho_b = approximate_receiver_state(alpha, beta, theta, k_dim);
            let fid = approximate_encoding_fidelity(alpha, beta, theta, k_dim);
            let phi = encoding_state(theta, k_dim)?;
            let kf = k_dim as f64;
            let commensurate = (linalg::cis(kf * theta) - linalg::ONE).norm() < ALGEBRAIC_TOL;
            let prod = product(&plan.iter().flat_map(|u| u.labels.clone()).collect::<Vec<_>>(), q)?.to_density();
            s.finish(|b| {
                let mut v = Vec::new();
                let st = b.state();
                if uses == 1 {
                    let rb = reduced(st, &["b1"])?;
                    v.push(Verdict::at_most("receiver state deviation", linalg::max_abs_diff(rb.matrix(), &rho_b), CHAINED_TOL));
                    let f = reduced(st, &[ENCODING])?.fidelity(&phi)?;
                    v.push(Verdict::at_most("encoding fidelity deviation", (f - fid).abs(), CHAINED_TOL));
                } else {
                    let labels: Vec<&str> = plan.iter().flat_map(|u| strs(&u.labels)).collect();
                    let rho = reduced(st, &labels)?;
                    let noise = rho.matrix() - prod.matrix() * linalg::r((kf - 4.0) / kf);
                    let norm = linalg::hermitian_op_norm(&noise);
                    v.push(Verdict::at_most("noise norm", norm, NOISE_CONSTANT / kf + CHAINED_TOL));
                    if commensurate {
                        let dev = linalg::max_abs_diff(&noise, &(prod.matrix() * linalg::r(4.0 / kf)));
                        v.push(Verdict::at_most("noise proportional to product", dev, CHAINED_TOL));
                    }
                }
                Ok((Some(st.clone()), v))
            })?
        }
    };

    if variant != GeneralVariant::Approximate {
        let total: f64 = t.branches.iter().map(|b| b.probability).sum::<f64>() + t.pruned.iter().map(|p| p.probability).sum::<f64>();
        let kf = k_dim as f64;
        let mut prev = total;
        for i in 0..uses {
            let upto = i + 1;
            let p: f64 = t
                .branches
                .iter()
                .filter(|b| {
                    checks.iter().take(upto).all(|&id| match variant {
                        GeneralVariant::Destructive => b.outcomes[id] >= 2,
                        _ => b.outcomes[id] == 1,
                    })
                })
                .map(|b| b.probability)
                .sum();
            let conditional = if prev > 0.0 { p / prev } else { 0.0 };
            let expected = (kf - 2.0 * upto as f64) / (kf - 2.0 * i as f64);
            let key = if i == 0 { String::from("success probability") } else { format!("use {upto} conditional success probability") };
            t.metrics.push((key.clone(), conditional));
            t.metrics.push((format!("expected {key}"), expected));
            if t.mode == Mode::Enumerate {
                t.verdicts.push(Verdict::at_most(format!("{key} deviation"), (conditional - expected).abs(), ALGEBRAIC_TOL));
            }
            prev = p;
        }
    } else if uses == 1 {
        t.metrics.push(("encoding fidelity".into(), approximate_encoding_fidelity(alpha, beta, theta, k_dim)));
    }
    Ok(t)
}

/// `sum_{k >= from} |k><k|`.
pub fn upper_projector(k_dim: usize, from: usize) -> Matrix {
    let d: Vec<C64> = (0..k_dim).map(|k| if k >= from { linalg::ONE } else { ZERO }).collect();
    linalg::diag(&d)
}
