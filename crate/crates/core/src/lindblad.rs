//! Generic Lindblad engine: Liouvillian superoperators, steady states,
//! spectra, and time-periodic evolution.
//!
//! All public rates and frequencies are ordinary frequencies f = omega/2pi
//! in GHz; the factor 2pi is applied exactly once, here, when assembling the
//! generator:
//!
//!   d(rho)/dt = 2pi * ( -i [H, rho] + sum_k rate_k D[O_k] rho )
//!
//! with D[O] rho = O rho O^dag - (1/2){O^dag O, rho}. Time is in ns.
//!
//! Vectorization is column-stacking, so D[O] maps to
//!   conj(O) (x) O - (1/2) ( I (x) O^dag O + (O^dag O)^T (x) I ).

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{CoreError, Result};
use crate::lapack;
use crate::qm::{kron_raw, QMatrix, ONE, ZERO};

pub const TWO_PI: f64 = std::f64::consts::TAU;

/// Threshold below which a Liouvillian eigenvalue counts as a zero mode.
pub const ZERO_MODE_TOL: f64 = 1e-9;
/// Residual bound for an accepted steady-state solve.
pub const STEADY_RESIDUAL_TOL: f64 = 1e-9;

/// Oscillating Hamiltonian term `A e^{+i 2pi f t} + A^dag e^{-i 2pi f t}`.
#[derive(Debug, Clone)]
pub struct PeriodicTerm {
    pub amplitude: QMatrix,
    /// Oscillation frequency (ordinary, GHz).
    pub f_osc: f64,
}

/// A Hamiltonian (possibly time-periodic) plus jump operators with rates.
#[derive(Debug, Clone)]
pub struct LindbladModel {
    pub hamiltonian: QMatrix,
    pub periodic_term: Option<PeriodicTerm>,
    pub jumps: Vec<(QMatrix, f64)>,
}

impl LindbladModel {
    pub fn new(hamiltonian: QMatrix, jumps: Vec<(QMatrix, f64)>) -> Result<Self> {
        hamiltonian.check_hermitian(1e-10)?;
        for (op, rate) in &jumps {
            if *rate < 0.0 {
                return Err(CoreError::InvalidParameter(format!("negative rate {rate}")));
            }
            if op.dim() != hamiltonian.dim() {
                return Err(CoreError::DimMismatch(
                    "jump operator dimension differs from Hamiltonian".into(),
                ));
            }
        }
        Ok(Self { hamiltonian, periodic_term: None, jumps })
    }

    pub fn with_periodic(mut self, amplitude: QMatrix, f_osc: f64) -> Self {
        self.periodic_term = Some(PeriodicTerm { amplitude, f_osc });
        self
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    /// Right-hand side of the master equation at time `t` (matrix form).
    pub fn rhs(&self, rho: &Array2<C64>, t: f64) -> Array2<C64> {
        let mut h = self.hamiltonian.data.clone();
        if let Some(p) = &self.periodic_term {
            let phase = C64::from_polar(1.0, TWO_PI * p.f_osc * t);
            let a = &p.amplitude.data;
            h = &h + &(a.mapv(|z| z * phase) + a.t().mapv(|z| z.conj() * phase.conj()));
        }
        let mi = C64::new(0.0, -1.0);
        let mut out = (lapack::matmul(&h, rho) - lapack::matmul(rho, &h)).mapv(|z| z * mi);
        for (op, rate) in &self.jumps {
            if *rate == 0.0 {
                continue;
            }
            let o = &op.data;
            let od = op.dagger().data;
            let odo = lapack::matmul(&od, o);
            let or = lapack::matmul(o, rho);
            let term = lapack::matmul(&or, &od);
            let anti = lapack::matmul(&odo, rho) + lapack::matmul(rho, &odo);
            out = out + (term - anti.mapv(|z| z * 0.5)).mapv(|z| z * *rate);
        }
        out.mapv(|z| z * TWO_PI)
    }
}

/// Dense superoperator in column-stacking vectorization.
#[derive(Debug, Clone)]
pub struct Superoperator {
    pub data: Array2<C64>,
    /// Hilbert-space dimension d; the matrix has side d^2.
    pub dim: usize,
}

/// Column-stacking vectorization: vec(rho)[i + d*j] = rho[i, j].
pub fn vectorize(rho: &Array2<C64>) -> Array1<C64> {
    let d = rho.nrows();
    let mut v = Array1::zeros(d * d);
    for j in 0..d {
        for i in 0..d {
            v[j * d + i] = rho[[i, j]];
        }
    }
    v
}

pub fn unvectorize(v: &Array1<C64>, d: usize) -> Array2<C64> {
    let mut m = Array2::zeros((d, d));
    for j in 0..d {
        for i in 0..d {
            m[[i, j]] = v[j * d + i];
        }
    }
    m
}

/// Static Liouvillian of a model (rejects models with a periodic term).
pub fn liouvillian(m: &LindbladModel) -> Result<Superoperator> {
    if m.periodic_term.is_some() {
        return Err(CoreError::InvalidParameter(
            "liouvillian requires a static model; strip the periodic term".into(),
        ));
    }
    m.hamiltonian.check_hermitian(1e-10)?;
    let d = m.dim();
    let eye = Array2::<C64>::eye(d);
    let h = &m.hamiltonian.data;
    // -i ( I (x) H - H^T (x) I )
    let mut l = kron_raw(&eye, h);
    l = l - kron_raw(&h.t().to_owned(), &eye);
    let mut l = l.mapv(|z| z * C64::new(0.0, -1.0));
    for (op, rate) in &m.jumps {
        if *rate == 0.0 {
            continue;
        }
        let o = &op.data;
        let oc = o.mapv(|z| z.conj());
        let od = op.dagger().data;
        let odo = lapack::matmul(&od, o);
        let mut term = kron_raw(&oc, o);
        term = term - kron_raw(&eye, &odo).mapv(|z| z * 0.5);
        term = term - kron_raw(&odo.t().to_owned(), &eye).mapv(|z| z * 0.5);
        l = l + term.mapv(|z| z * *rate);
    }
    Ok(Superoperator { data: l.mapv(|z| z * TWO_PI), dim: d })
}

/// Superoperator for the commutator part `-i 2pi [A, .]` alone.
pub fn hamiltonian_superop(a: &Array2<C64>) -> Array2<C64> {
    let d = a.nrows();
    let eye = Array2::<C64>::eye(d);
    let l = kron_raw(&eye, a) - kron_raw(&a.t().to_owned(), &eye);
    l.mapv(|z| z * C64::new(0.0, -TWO_PI))
}

/// Steady state via trace-replacement linear solve with eigendecomposition
/// fallback. Checks the residual ||L vec(rho)||_max.
pub fn steady_state(l: &Superoperator, dims: &[usize]) -> Result<QMatrix> {
    let d = l.dim;
    let d2 = d * d;
    let mut m = l.data.clone();
    // replace the first row with the trace constraint
    for col in 0..d2 {
        m[[0, col]] = ZERO;
    }
    for k in 0..d {
        m[[0, k * d + k]] = ONE;
    }
    let mut b = Array1::zeros(d2);
    b[0] = ONE;
    if let Ok(v) = lapack::solve(&m, &b) {
        let rho = unvectorize(&v, d);
        let cand = QMatrix::new(rho, dims.to_vec())?.hermitized_normalized();
        let resid = residual(l, &cand);
        if resid <= STEADY_RESIDUAL_TOL {
            return Ok(cand);
        }
    }
    // fallback: dense eigendecomposition, take the kernel mode
    let (w, v) = lapack::eig(&l.data)?;
    let mut order: Vec<usize> = (0..d2).collect();
    order.sort_by(|&a, &bb| w[bb].re.partial_cmp(&w[a].re).unwrap());
    let zero_modes: Vec<usize> =
        order.iter().copied().filter(|&k| w[k].re.abs() < ZERO_MODE_TOL && w[k].norm() < 1e-6).collect();
    if zero_modes.is_empty() {
        return Err(CoreError::SteadyState(format!(
            "no zero mode found; largest eigenvalue real part {:.3e}",
            w[order[0]].re
        )));
    }
    if zero_modes.len() > 1 {
        return Err(CoreError::Multistable { lambda1: w[zero_modes[1]].re });
    }
    let k = zero_modes[0];
    let vk = v.column(k).to_owned();
    let rho = unvectorize(&vk, d);
    let cand = QMatrix::new(rho, dims.to_vec())?.hermitized_normalized();
    let resid = residual(l, &cand);
    if resid > STEADY_RESIDUAL_TOL * 10.0 {
        return Err(CoreError::SteadyState(format!("eigenmode residual {resid:.3e}")));
    }
    Ok(cand)
}

/// Max-norm of L vec(rho).
pub fn residual(l: &Superoperator, rho: &QMatrix) -> f64 {
    let v = vectorize(&rho.data);
    let r = l.data.dot(&v);
    r.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Verify that the kernel of L is one-dimensional (spectral check).
pub fn check_unique_steady(l: &Superoperator) -> Result<()> {
    let w = lapack::eigvals(&l.data)?;
    let mut re: Vec<f64> = w.iter().map(|z| z.re).collect();
    re.sort_by(|a, b| b.partial_cmp(a).unwrap());
    if re.len() > 1 && re[1] > -ZERO_MODE_TOL {
        return Err(CoreError::Multistable { lambda1: re[1] });
    }
    Ok(())
}

/// First `k` Liouvillian eigenvalues sorted by descending real part.
pub fn liouvillian_spectrum(l: &Superoperator, k: usize) -> Result<Vec<C64>> {
    let w = lapack::eigvals(&l.data)?;
    let mut ev: Vec<C64> = w.to_vec();
    ev.sort_by(|a, b| b.re.partial_cmp(&a.re).unwrap());
    ev.truncate(k);
    Ok(ev)
}

/// Adaptive Dormand-Prince 5(4) controls.
#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { rtol: 1e-8, atol: 1e-10, max_steps: 200_000_000 }
    }
}

const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B5: [f64; 7] =
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One integrator able to step a density matrix through `m.rhs`.
struct DormandPrince<'a> {
    m: &'a LindbladModel,
    opts: EvolveOptions,
}

impl<'a> DormandPrince<'a> {
    fn err_norm(&self, y: &Array2<C64>, ynew: &Array2<C64>, e: &Array2<C64>) -> f64 {
        let mut acc = 0.0f64;
        let mut n = 0usize;
        for ((yi, yni), ei) in y.iter().zip(ynew.iter()).zip(e.iter()) {
            let sc = self.opts.atol + self.opts.rtol * yi.norm().max(yni.norm());
            let r = ei.norm() / sc;
            acc += r * r;
            n += 1;
        }
        (acc / n as f64).sqrt()
    }

    /// Integrate from (t0, y0) to t1. Returns y(t1).
    fn integrate(
        &self,
        mut t: f64,
        mut y: Array2<C64>,
        t1: f64,
        dt_hint: f64,
    ) -> Result<(Array2<C64>, f64)> {
        let mut h = dt_hint.min(t1 - t).max(1e-300);
        let mut k: Vec<Array2<C64>> = Vec::with_capacity(7);
        let mut steps = 0usize;
        while t < t1 - 1e-15 * t1.abs().max(1.0) {
            steps += 1;
            if steps > self.opts.max_steps {
                return Err(CoreError::StepUnderflow { t });
            }
            if t + h > t1 {
                h = t1 - t;
            }
            k.clear();
            k.push(self.m.rhs(&y, t));
            for s in 1..7 {
                let mut ys = y.clone();
                for (j, kj) in k.iter().enumerate() {
                    let a = DP_A[s - 1][j];
                    if a != 0.0 {
                        ys = ys + kj.mapv(|z| z * (a * h));
                    }
                }
                k.push(self.m.rhs(&ys, t + DP_C[s] * h));
            }
            let mut y5 = y.clone();
            let mut err = Array2::<C64>::zeros(y.raw_dim());
            for (j, kj) in k.iter().enumerate() {
                if DP_B5[j] != 0.0 {
                    y5 = y5 + kj.mapv(|z| z * (DP_B5[j] * h));
                }
                let db = DP_B5[j] - DP_B4[j];
                if db != 0.0 {
                    err = err + kj.mapv(|z| z * (db * h));
                }
            }
            let e = self.err_norm(&y, &y5, &err);
            if e <= 1.0 {
                t += h;
                y = y5;
            }
            let factor = if e > 0.0 { 0.9 * e.powf(-0.2) } else { 5.0 };
            h *= factor.clamp(0.2, 5.0);
            if h < 1e-14 {
                return Err(CoreError::StepUnderflow { t });
            }
        }
        Ok((y, h))
    }
}

/// High-order adaptive integration of the (possibly periodic) master equation.
///
/// Returns sampled (t, rho) pairs including both endpoints; `n_samples`
/// controls the output grid only, not the internal adaptive steps.
pub fn evolve_periodic(
    m: &LindbladModel,
    rho0: &QMatrix,
    t_end: f64,
    dt_hint: f64,
    n_samples: usize,
    opts: EvolveOptions,
) -> Result<Vec<(f64, QMatrix)>> {
    rho0.check_density_matrix()?;
    let stepper = DormandPrince { m, opts };
    let n = n_samples.max(2);
    let mut out = Vec::with_capacity(n);
    out.push((0.0, rho0.clone()));
    let mut y = rho0.data.clone();
    let mut h = dt_hint;
    for i in 1..n {
        let ti = t_end * i as f64 / (n - 1) as f64;
        let (ynew, hnew) = stepper.integrate(out[i - 1].0, y, ti, h)?;
        y = ynew;
        h = hnew;
        out.push((ti, QMatrix::new(y.clone(), rho0.dims.clone())?));
    }
    Ok(out)
}

/// Options for the period-averaged quasi-steady solver.
#[derive(Debug, Clone, Copy)]
pub struct PeriodAverageOptions {
    /// Period-to-period trace-distance convergence threshold.
    pub tol: f64,
    /// Give up after this many periods.
    pub max_periods: usize,
    /// Sub-intervals per period used for the final average.
    pub avg_samples: usize,
    pub evolve: EvolveOptions,
}

impl Default for PeriodAverageOptions {
    fn default() -> Self {
        Self { tol: 1e-6, max_periods: 20_000, avg_samples: 32, evolve: EvolveOptions::default() }
    }
}

/// Result of the period-averaged solve.
#[derive(Debug, Clone)]
pub struct PeriodAveraged {
    pub rho: QMatrix,
    pub periods: usize,
    /// Final period-to-period trace distance.
    pub residual: f64,
    /// Largest trace distance of the in-period state from the average.
    pub oscillation: f64,
}

/// Evolve until the stroboscopic state stops changing, then average the
/// density matrix over one drive period (trapezoid rule) and renormalize.
pub fn period_averaged_steady(
    m: &LindbladModel,
    rho0: &QMatrix,
    opts: PeriodAverageOptions,
) -> Result<PeriodAveraged> {
    let p = m.periodic_term.as_ref().ok_or_else(|| {
        CoreError::InvalidParameter("period_averaged_steady requires a periodic term".into())
    })?;
    if p.amplitude.data.iter().all(|z| *z == ZERO) {
        // amplitude zero: static problem
        let mut stat = m.clone();
        stat.periodic_term = None;
        let l = liouvillian(&stat)?;
        let rho = steady_state(&l, &rho0.dims)?;
        return Ok(PeriodAveraged { rho, periods: 0, residual: 0.0, oscillation: 0.0 });
    }
    rho0.check_density_matrix()?;
    let period = 1.0 / p.f_osc;
    let stepper = DormandPrince { m, opts: opts.evolve };
    let mut y = rho0.data.clone();
    let mut h = period / 64.0;
    let mut t = 0.0;
    let mut prev: Option<Array2<C64>> = None;
    let mut residual = f64::INFINITY;
    let mut periods_run = 0usize;
    for n in 0..opts.max_periods {
        let (ynew, hnew) = stepper.integrate(t, y, (n + 1) as f64 * period, h)?;
        y = ynew;
        h = hnew;
        t = (n + 1) as f64 * period;
        periods_run = n + 1;
        if let Some(pv) = &prev {
            let diff = QMatrix::new(&y - pv, rho0.dims.clone())?;
            let zero = QMatrix::zeros(rho0.dims.clone());
            residual = crate::qm::trace_distance(&diff, &zero)?;
            if residual < opts.tol {
                break;
            }
        }
        prev = Some(y.clone());
    }
    if residual >= opts.tol {
        return Err(CoreError::NoConvergence { periods: periods_run, residual });
    }
    // average over one final period
    let ns = opts.avg_samples.max(2);
    let mut acc = Array2::<C64>::zeros(y.raw_dim());
    let mut samples: Vec<Array2<C64>> = Vec::with_capacity(ns + 1);
    samples.push(y.clone());
    for k in 1..=ns {
        let tk = t + period * k as f64 / ns as f64;
        let (ynew, hnew) = stepper.integrate(t + period * (k - 1) as f64 / ns as f64, y, tk, h)?;
        y = ynew;
        h = hnew;
        samples.push(y.clone());
    }
    for (k, s) in samples.iter().enumerate() {
        let w = if k == 0 || k == ns { 0.5 } else { 1.0 };
        acc = acc + s.mapv(|z| z * (w / ns as f64));
    }
    let rho = QMatrix::new(acc, rho0.dims.clone())?.hermitized_normalized();
    let mut oscillation = 0.0f64;
    for s in &samples {
        let sq = QMatrix::new(s.clone(), rho0.dims.clone())?;
        oscillation = oscillation.max(crate::qm::trace_distance(&sq, &rho)?);
    }
    Ok(PeriodAveraged { rho, periods: periods_run, residual, oscillation })
}
