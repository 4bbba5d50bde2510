//! Closed-form evaluation of the four-step transition amplitude for square
//! and delta pulses.
//!
//! For square pulses every nested integrand is a piecewise
//! exponential–polynomial in time, so the four time integrals close under
//! symbolic iterated integration. The engine below carries, per breakpoint
//! interval, a term list `Σ c·(u−a)^p·e^{iλ(u−a)}` with the interval start as
//! local origin, and evaluates the moment kernels
//! `φ_p(λ, w) = ∫₀^w v^p e^{iλv} dv` through a series branch at small `λw`,
//! which keeps slow Zeeman phases (including exactly zero) stable.
//!
//! Delta pulses are the `duration → 0` limit of the slowly-varying-envelope
//! density kernel: the amplitude collapses to the pulse areas, the 1/(Δ_w Δ_r)
//! prefactor, and the stored-interval Zeeman phase. That limit is what makes
//! the long-delay physics a function of K·Δt alone.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::pulse::{PulseShape, Timeline};
use crate::scalar::Scalar;

/// One `c · (u − a)^p · e^{iλ(u − a)}` term; the local origin `a` belongs to
/// the enclosing interval.
#[derive(Debug, Clone, Copy)]
struct Term<T: Scalar> {
    c: Complex<T>,
    p: usize,
    lam: T,
}

#[derive(Debug, Clone)]
struct Piece<T: Scalar> {
    a: T,
    b: T,
    terms: Vec<Term<T>>,
}

/// φ_p(λ, w) = ∫₀^w v^p e^{iλv} dv for p ≤ 3.
fn phi<T: Scalar>(p: usize, lam: T, w: T) -> Complex<T> {
    debug_assert!(p <= 3);
    let x = lam * w;
    if x.abs() < T::of(0.5) {
        // w^{p+1} Σ_j (iλw)^j / (j! (p+j+1)); 17 terms reach ~1e-20 at |x|=0.5.
        let ix = Complex::new(T::zero(), x);
        let mut pow = Complex::new(T::one(), T::zero());
        let mut acc = Complex::new(T::zero(), T::zero());
        for j in 0..=16usize {
            acc += pow * (T::one() / T::of((p + j + 1) as f64));
            pow = pow * ix * (T::one() / T::of((j + 1) as f64));
        }
        acc * w.powi(p as i32 + 1)
    } else {
        let ilam = Complex::new(T::zero(), lam);
        let e = Complex::cis(x);
        let one = Complex::new(T::one(), T::zero());
        let mut acc = (e - one) / ilam;
        for k in 1..=p {
            acc = (e * w.powi(k as i32) - acc * T::of(k as f64)) / ilam;
        }
        acc
    }
}

/// Symbolic antiderivative of one term, as terms in the same local origin,
/// vanishing at the interval start.
fn antiderivative<T: Scalar>(term: &Term<T>, span: T) -> Vec<Term<T>> {
    // Below this phase accrual the exponential is indistinguishable from 1
    // at the accuracy the engine promises.
    if (term.lam * span).abs() < T::of(1e-10) {
        return vec![Term {
            c: term.c / T::of((term.p + 1) as f64),
            p: term.p + 1,
            lam: T::zero(),
        }];
    }
    let ilam = Complex::new(T::zero(), term.lam);
    // φ_0 = e^{iλw}/(iλ) − 1/(iλ);  φ_k = w^k e^{iλw}/(iλ) − (k/(iλ)) φ_{k−1}
    let mut terms = vec![
        Term {
            c: Complex::new(T::one(), T::zero()) / ilam,
            p: 0,
            lam: term.lam,
        },
        Term {
            c: -Complex::new(T::one(), T::zero()) / ilam,
            p: 0,
            lam: T::zero(),
        },
    ];
    for k in 1..=term.p {
        for t in &mut terms {
            t.c = -(t.c * T::of(k as f64)) / ilam;
        }
        terms.push(Term {
            c: Complex::new(T::one(), T::zero()) / ilam,
            p: k,
            lam: term.lam,
        });
    }
    for t in &mut terms {
        t.c *= term.c;
    }
    terms
}

fn merge<T: Scalar>(terms: Vec<Term<T>>) -> Vec<Term<T>> {
    let mut out: Vec<Term<T>> = Vec::with_capacity(terms.len());
    for t in terms {
        if let Some(existing) = out.iter_mut().find(|e| e.p == t.p && e.lam == t.lam) {
            existing.c += t.c;
        } else {
            out.push(t);
        }
    }
    out
}

/// One nesting level: the running integral of `env(u) · e^{i·shift·u} ·
/// prev(u)` from 0, as a new piecewise term list.
fn integrate_level<T: Scalar, F>(pieces: &[Piece<T>], shift: T, env: F) -> Vec<Piece<T>>
where
    F: Fn(T) -> T,
{
    let mut running = Complex::new(T::zero(), T::zero());
    let mut out = Vec::with_capacity(pieces.len());
    for piece in pieces {
        let span = piece.b - piece.a;
        let amp = env((piece.a + piece.b) / T::of(2.0));
        let mut terms = vec![Term {
            c: running,
            p: 0,
            lam: T::zero(),
        }];
        if amp != T::zero() {
            let phase_a = Complex::cis(shift * piece.a) * amp;
            for t in &piece.terms {
                let integrand = Term {
                    c: t.c * phase_a,
                    p: t.p,
                    lam: t.lam + shift,
                };
                running += integrand.c * phi(integrand.p, integrand.lam, span);
                terms.extend(antiderivative(&integrand, span));
            }
        }
        out.push(Piece {
            a: piece.a,
            b: piece.b,
            terms: merge(terms),
        });
    }
    out
}

/// Final level: only the value of the running integral at the last endpoint
/// is needed.
fn integral_value<T: Scalar>(pieces: &[Piece<T>], shift: T) -> Complex<T> {
    let mut running = Complex::new(T::zero(), T::zero());
    for piece in pieces {
        let span = piece.b - piece.a;
        let phase_a = Complex::cis(shift * piece.a);
        for t in &piece.terms {
            running += t.c * phase_a * phi(t.p, t.lam + shift, span);
        }
    }
    running
}

fn square_support<T: Scalar>(timeline: &Timeline<T>) -> (T, T, T, T) {
    (
        timeline.write.start_ns,
        timeline.write.end_ns(),
        timeline.read.start_ns,
        timeline.read.end_ns(),
    )
}

/// Large-detuning validity gate shared by the closed-form paths: the carrier
/// detunings must dominate both the Zeeman rates and the envelope bandwidth
/// by three orders of magnitude.
pub(crate) fn check_regime_rates<T: Scalar>(
    worst_zeeman_rad_per_s: T,
    timeline: &Timeline<T>,
) -> Result<()> {
    let mut floor = worst_zeeman_rad_per_s.abs();
    for pulse in [&timeline.write, &timeline.read] {
        if !matches!(pulse.shape, PulseShape::Delta) {
            floor = floor.max(T::one() / (pulse.fwhm_ns * T::of(1e-9)));
        }
    }
    let needed = floor * T::of(1e3);
    for (label, pulse) in [("write", &timeline.write), ("read", &timeline.read)] {
        if pulse.detuning_rad_per_s.abs() < needed {
            return Err(Error::UnsupportedRegime(format!(
                "{label} detuning {:.3e} rad/s is below 1e3 x the slow scales ({:.3e} rad/s)",
                pulse.detuning_rad_per_s.to_f64_lossy(),
                floor.to_f64_lossy(),
            )));
        }
    }
    Ok(())
}

/// Closed-form four-step transition amplitude at observation time `t_ns` for
/// one atom with ground/storage Zeeman rates `zeeman_g`, `zeeman_s` (rad/s).
///
/// Square pulses are evaluated exactly; delta pulses through the
/// density-kernel limit. Anything else is unsupported here — the numeric
/// backend handles arbitrary envelopes.
pub fn transition_amplitude_analytic<T: Scalar>(
    t_ns: T,
    zeeman_g_rad_per_s: T,
    zeeman_s_rad_per_s: T,
    timeline: &Timeline<T>,
) -> Result<Complex<T>> {
    check_regime_rates(
        zeeman_g_rad_per_s.abs().max(zeeman_s_rad_per_s.abs()),
        timeline,
    )?;
    if timeline.write.start_ns < T::zero() {
        return Err(Error::InvalidPulse(
            "write pulse must not start before t = 0".to_string(),
        ));
    }
    let zg = zeeman_g_rad_per_s * T::of(1e-9);
    let zs = zeeman_s_rad_per_s * T::of(1e-9);
    let dw = timeline.write.detuning_rad_per_ns();
    let dr = timeline.read.detuning_rad_per_ns();

    match (timeline.write.shape, timeline.read.shape) {
        (PulseShape::Square, PulseShape::Square) => {
            if t_ns <= T::zero() {
                return Ok(Complex::new(T::zero(), T::zero()));
            }
            let (w0, w1, r0, r1) = square_support(timeline);
            let mut bps: Vec<T> = [w0, w1, r0, r1]
                .into_iter()
                .filter(|&x| x > T::zero() && x < t_ns)
                .collect();
            bps.push(T::zero());
            bps.push(t_ns);
            bps.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
            bps.dedup();
            let unit = Complex::new(T::one(), T::zero());
            let pieces: Vec<Piece<T>> = bps
                .windows(2)
                .map(|w| Piece {
                    a: w[0],
                    b: w[1],
                    terms: vec![Term {
                        c: unit,
                        p: 0,
                        lam: T::zero(),
                    }],
                })
                .collect();

            let write = timeline.write;
            let read = timeline.read;
            let l1 = integrate_level(&pieces, dw - zg, move |u| write.envelope(u));
            let l2 = integrate_level(&l1, zs - dw, |_| T::one());
            let l3 = integrate_level(&l2, dr - zs, move |u| read.envelope(u));
            Ok(integral_value(&l3, zg - dr))
        }
        (PulseShape::Delta, PulseShape::Delta) => {
            let t_w = timeline.write.start_ns;
            let t_r = timeline.read.start_ns;
            if t_ns < t_r || t_w < T::zero() {
                return Ok(Complex::new(T::zero(), T::zero()));
            }
            let omega = zg - zs; // rad/ns
            let scale = timeline.write.area() * timeline.read.area() / (dw * dr);
            Ok(-Complex::cis(omega * (t_r - t_w)) * scale)
        }
        _ => Err(Error::UnsupportedShape(
            "closed form covers square/square and delta/delta timelines".to_string(),
        )),
    }
}
