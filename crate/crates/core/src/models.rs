//! Hamiltonians, frames, and dissipators of the two-emitter + THz-cavity
//! system at every approximation level.
//!
//! Levels, from exact to most reduced:
//!
//! 1. full time-dependent model in the carrier-laser frame (cavity kept at
//!    its own frequency, sideband drive as an explicit oscillating term);
//! 2. static model after the generalized rotating-wave approximation (GRWA):
//!    dressed two-qubit space plus cavity, polaron Lamb shifts folded in;
//! 3. adiabatic model with the cavity eliminated into a collective jump
//!    operator;
//! 4. doubly-dressed two-qubit model with the collective jump split into
//!    three secular channels.
//!
//! Frame conventions: dressed and doubly-dressed qubit blocks order the upper
//! state first (`|+> -> 0`, `|-> -> 1`), so the respective sigma_z analogues
//! are diag(+1, -1).

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{CoreError, Result};
use crate::lapack;
use crate::lindblad::LindbladModel;
use crate::qm::{destroy, embed, kron_raw, sigma_minus, sigma_x, sigma_z, QMatrix};

/// All physical rates and drive parameters, as ordinary frequencies in GHz.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    /// Cavity frequency.
    pub f_thz: f64,
    /// Carrier detunings (Delta_1, Delta_2).
    pub delta: [f64; 2],
    /// Carrier Rabi amplitudes (Omega_1, Omega_2).
    pub omega: [f64; 2],
    /// Sideband Rabi amplitudes.
    pub omega_sb: [f64; 2],
    /// Cavity couplings (chi_1, chi_2).
    pub chi: [f64; 2],
    /// Cavity loss rate.
    pub kappa: f64,
    /// Emitter decay rates.
    pub gamma: [f64; 2],
    /// Cavity truncation dimension.
    pub n_fock: usize,
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        if self.f_thz <= 0.0 {
            return Err(CoreError::InvalidParameter("f_thz must be positive".into()));
        }
        if self.kappa < 0.0 || self.gamma.iter().any(|&g| g < 0.0) || self.chi.iter().any(|&x| x < 0.0)
        {
            return Err(CoreError::InvalidParameter("rates must be non-negative".into()));
        }
        if self.n_fock < 2 {
            return Err(CoreError::InvalidParameter("n_fock must be at least 2".into()));
        }
        Ok(())
    }
}

/// Primary (carrier) dressing frame of both emitters.
#[derive(Debug, Clone, Copy)]
pub struct DressedFrame {
    /// Mixing angles theta_i (rad).
    pub theta: [f64; 2],
    /// Rabi splittings Omega_R,i = sqrt(Delta_i^2 + Omega_i^2).
    pub omega_r: [f64; 2],
    pub cos_t: [f64; 2],
    pub sin_t: [f64; 2],
    /// Polaron Lamb shifts Lambda_i.
    pub lamb: [f64; 2],
    /// Cavity-mediated qubit-qubit coupling J.
    pub j_coupling: f64,
    /// Dressed detunings Delta_R,i = Omega_R,i - f_thz - Lambda_i.
    pub delta_r: [f64; 2],
}

/// Secondary (sideband) dressing frame.
#[derive(Debug, Clone, Copy)]
pub struct DoublyDressedFrame {
    /// Mixing angles theta-tilde_i (rad).
    pub theta: [f64; 2],
    /// Splittings Omega-tilde_R,i.
    pub omega_rt: [f64; 2],
    pub cos_t: [f64; 2],
    pub sin_t: [f64; 2],
    /// Purcell rates Gamma_i = 4 (2 c_i s_i chi_i)^2 / kappa.
    pub purcell: [f64; 2],
}

/// Closed-form dressing frame from the carrier drive.
///
/// theta_i = arctan((Omega_R,i - Delta_i) / Omega_i) in [0, pi/2); the limit
/// Omega -> 0 at positive detuning gives theta = 0. The Lamb shift and J
/// come from the polaron displacement of the longitudinal cavity coupling;
/// for chi_1 = chi_2 = chi they reduce to Lambda_i = 8 chi^2 (c_i^2-s_i^2)/f_thz
/// and J = 2 chi^2 (c_1^2-s_1^2)(c_2^2-s_2^2)/f_thz.
pub fn dressed_frame(p: &SystemParams) -> Result<DressedFrame> {
    let mut theta = [0.0; 2];
    let mut omega_r = [0.0; 2];
    for i in 0..2 {
        if p.omega[i] == 0.0 && p.delta[i] == 0.0 {
            return Err(CoreError::DegenerateFrame { emitter: i + 1 });
        }
        omega_r[i] = (p.delta[i] * p.delta[i] + p.omega[i] * p.omega[i]).sqrt();
        theta[i] = (omega_r[i] - p.delta[i]).atan2(p.omega[i]);
    }
    let cos_t = [theta[0].cos(), theta[1].cos()];
    let sin_t = [theta[0].sin(), theta[1].sin()];
    let cos2 = [
        cos_t[0] * cos_t[0] - sin_t[0] * sin_t[0],
        cos_t[1] * cos_t[1] - sin_t[1] * sin_t[1],
    ];
    let lamb = [
        4.0 * p.chi[0] * (p.chi[0] + p.chi[1]) * cos2[0] / p.f_thz,
        4.0 * p.chi[1] * (p.chi[0] + p.chi[1]) * cos2[1] / p.f_thz,
    ];
    let j_coupling = 2.0 * p.chi[0] * p.chi[1] * cos2[0] * cos2[1] / p.f_thz;
    let delta_r = [
        omega_r[0] - p.f_thz - lamb[0],
        omega_r[1] - p.f_thz - lamb[1],
    ];
    Ok(DressedFrame { theta, omega_r, cos_t, sin_t, lamb, j_coupling, delta_r })
}

/// Secondary dressing by the sideband drive.
///
/// The Rabi term seen by the dressed transition is c_i^2 Omega_sb,i, so
/// Omega-tilde_R,i = sqrt(Delta_R,i^2 + c_i^4 Omega_sb,i^2) and
/// theta-tilde_i = arctan((Omega-tilde_R,i - Delta_R,i) / (c_i^2 Omega_sb,i)).
pub fn doubly_dressed_frame(p: &SystemParams, d: &DressedFrame) -> Result<DoublyDressedFrame> {
    let mut theta = [0.0; 2];
    let mut omega_rt = [0.0; 2];
    let mut purcell = [0.0; 2];
    for i in 0..2 {
        let w = d.cos_t[i] * d.cos_t[i] * p.omega_sb[i];
        if w == 0.0 && d.delta_r[i] == 0.0 {
            return Err(CoreError::DegenerateFrame { emitter: i + 1 });
        }
        omega_rt[i] = (d.delta_r[i] * d.delta_r[i] + w * w).sqrt();
        theta[i] = (omega_rt[i] - d.delta_r[i]).atan2(w);
        let g = 2.0 * d.cos_t[i] * d.sin_t[i] * p.chi[i];
        purcell[i] = if p.kappa > 0.0 { 4.0 * g * g / p.kappa } else { 0.0 };
    }
    Ok(DoublyDressedFrame {
        theta,
        omega_rt,
        cos_t: [theta[0].cos(), theta[1].cos()],
        sin_t: [theta[0].sin(), theta[1].sin()],
        purcell,
    })
}

/// 2x2 rotation whose columns are the upper/lower frame states expressed in
/// the parent basis: |up> = (cos, sin), |low> = (-sin, cos). Conjugating an
/// operator written in the rotated frame with this matrix expresses it in
/// the parent frame.
pub fn frame_rotation(theta: f64) -> Array2<C64> {
    let (s, c) = theta.sin_cos();
    ndarray::array![
        [C64::new(c, 0.0), C64::new(-s, 0.0)],
        [C64::new(s, 0.0), C64::new(c, 0.0)]
    ]
}

/// Bare sigma_- written in the dressed frame:
/// sigma = c^2 xi - s^2 xi^dag + c s xi_z.
pub fn sigma_in_dressed(theta: f64) -> Array2<C64> {
    let (s, c) = theta.sin_cos();
    let xi = sigma_minus();
    let xid = xi.t().mapv(|z| z.conj());
    let xz = sigma_z();
    xi.mapv(|z| z * (c * c)) - xid.mapv(|z| z * (s * s)) + xz.mapv(|z| z * (c * s))
}

/// Validity diagnostics attached to a constructed model.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidityFlags {
    /// GRWA weak-coupling and weak-sideband assumptions (chi, Omega_sb << f_thz).
    pub grwa_ok: bool,
    /// Bad-cavity adiabatic elimination (kappa >= 2 c s chi and kappa >= |Delta_R|).
    pub adiabatic_ok: bool,
    /// Rotating-wave treatment of the cavity dissipation (f_thz >= 10 kappa).
    pub rwa_ok: bool,
    /// Strong-driving splitting of the collective jump (Omega-tilde >= 5 Gamma).
    pub strong_driving_ok: bool,
}

pub fn validity_flags(p: &SystemParams, d: &DressedFrame, dd: &DoublyDressedFrame) -> ValidityFlags {
    let grwa_ok = (0..2).all(|i| {
        p.chi[i] / p.f_thz <= 0.1 && p.omega_sb[i] / p.f_thz <= 0.1
    });
    let adiabatic_ok = (0..2).all(|i| {
        let g = 2.0 * d.cos_t[i] * d.sin_t[i] * p.chi[i];
        p.kappa >= g && p.kappa >= d.delta_r[i].abs()
    });
    let rwa_ok = p.f_thz >= 10.0 * p.kappa;
    let strong_driving_ok = (0..2).all(|i| dd.omega_rt[i] >= 5.0 * dd.purcell[i]);
    ValidityFlags { grwa_ok, adiabatic_ok, rwa_ok, strong_driving_ok }
}

/// Positive-frequency cavity quadrature transitions of `h_static`.
///
/// Diagonalize the Hamiltonian; for every eigenpair with transition
/// frequency f_k - f_j > 0 keep the lowering component of (a + a^dag)
/// weighted by sqrt((f_k - f_j)/f_thz). Transitions with |f_k - f_j| below
/// 1e-9 are excluded. For a bare cavity the construction returns `a` itself.
pub fn build_xplus(h_static: &QMatrix, a: &QMatrix, f_thz: f64) -> Result<QMatrix> {
    h_static.check_hermitian(1e-8)?;
    let (w, u) = lapack::eigh(&h_static.data)?;
    let quad = a.add(&a.dagger());
    // X in the eigenbasis: U^dag (a+a^dag) U
    let ud = u.t().mapv(|z| z.conj());
    let x_eig = lapack::matmul(&lapack::matmul(&ud.to_owned(), &quad.data), &u);
    let n = w.len();
    let mut upper = Array2::<C64>::zeros((n, n));
    for j in 0..n {
        for k in (j + 1)..n {
            let f_kj = w[k] - w[j];
            if f_kj > 1e-9 {
                upper[[j, k]] = C64::new((f_kj / f_thz).sqrt(), 0.0) * x_eig[[j, k]];
            }
        }
    }
    // back to the computational basis
    let back = lapack::matmul(&lapack::matmul(&u, &upper), &ud.to_owned());
    QMatrix::new(back, a.dims.clone())
}

/// Composite-space helper bundle for two qubits plus the cavity.
struct QubitCavitySpace {
    dims: Vec<usize>,
    a: QMatrix,
}

fn qubit_cavity_space(n_fock: usize) -> QubitCavitySpace {
    let dims = vec![2usize, 2, n_fock];
    let a = embed(&destroy(n_fock), 2, &dims);
    QubitCavitySpace { dims, a }
}

/// Full time-dependent model in the carrier-laser frame (emitters x cavity).
///
/// Static part: cavity at f_thz, carrier detunings and drives, and the
/// permanent-dipole coupling chi_i (1 + sigma_z,i)(a + a^dag). The sideband
/// drive enters as the periodic amplitude sum_i (Omega_sb,i/2) sigma_i
/// oscillating at f_thz. Jumps: bare sigma_i at gamma_i and the
/// positive-frequency quadrature operator at kappa.
pub fn build_full_model(p: &SystemParams) -> Result<LindbladModel> {
    p.validate()?;
    let sp = qubit_cavity_space(p.n_fock);
    let dims = &sp.dims;
    let a = &sp.a;
    let quad = a.add(&a.dagger());
    let num = a.dagger().matmul(a);

    let mut h = num.scale(C64::new(p.f_thz, 0.0));
    for i in 0..2 {
        let sz = embed(&sigma_z(), i, dims);
        let sx = embed(&sigma_x(), i, dims);
        h = h.add(&sz.scale(C64::new(p.delta[i] / 2.0, 0.0)));
        h = h.add(&sx.scale(C64::new(p.omega[i] / 2.0, 0.0)));
        // chi (1 + sigma_z)(a + a^dag)
        let proj = QMatrix::identity(dims.clone()).add(&sz);
        h = h.add(&proj.matmul(&quad).scale(C64::new(p.chi[i], 0.0)));
    }
    let xplus = build_xplus(&h, a, p.f_thz)?;
    let mut jumps = Vec::new();
    for i in 0..2 {
        jumps.push((embed(&sigma_minus(), i, dims), p.gamma[i]));
    }
    jumps.push((xplus, p.kappa));
    let mut amp = QMatrix::zeros(dims.clone());
    for i in 0..2 {
        amp = amp.add(&embed(&sigma_minus(), i, dims).scale(C64::new(p.omega_sb[i] / 2.0, 0.0)));
    }
    Ok(LindbladModel::new(h, jumps)?.with_periodic(amp, p.f_thz))
}

/// GRWA model: static Hamiltonian in the dressed two-qubit x cavity space,
/// rotating at the cavity frequency.
///
/// H = sum_i [ (Delta_R,i/2) xi_z,i + c_i^2 (Omega_sb,i/2) xi_x,i ]
///     - J xi_z,1 xi_z,2 + sum_i (-2 chi_i c_i s_i)(a^dag xi_i + a xi_i^dag).
///
/// Jumps: the bare decay rewritten in the dressed basis at gamma_i, and the
/// positive-frequency quadrature operator at kappa. The quadrature operator
/// is built from the Hamiltonian with the cavity restored at f_thz so that
/// its transition weights are evaluated at physical (laboratory-frame)
/// frequencies; in the decoupled limit it reduces to `a`.
pub fn build_grwa_model(p: &SystemParams) -> Result<LindbladModel> {
    p.validate()?;
    let d = dressed_frame(p)?;
    let sp = qubit_cavity_space(p.n_fock);
    let dims = &sp.dims;
    let a = &sp.a;

    let mut h = QMatrix::zeros(dims.clone());
    for i in 0..2 {
        let xz = embed(&sigma_z(), i, dims);
        let xx = embed(&sigma_x(), i, dims);
        let xi = embed(&sigma_minus(), i, dims);
        h = h.add(&xz.scale(C64::new(d.delta_r[i] / 2.0, 0.0)));
        let w = d.cos_t[i] * d.cos_t[i] * p.omega_sb[i];
        h = h.add(&xx.scale(C64::new(w / 2.0, 0.0)));
        let g = -2.0 * p.chi[i] * d.cos_t[i] * d.sin_t[i];
        let jc = a.dagger().matmul(&xi).add(&a.matmul(&xi.dagger()));
        h = h.add(&jc.scale(C64::new(g, 0.0)));
    }
    let zz = embed(&sigma_z(), 0, dims).matmul(&embed(&sigma_z(), 1, dims));
    h = h.add(&zz.scale(C64::new(-d.j_coupling, 0.0)));

    let h_lab = h.add(&a.dagger().matmul(a).scale(C64::new(p.f_thz, 0.0)));
    let xplus = build_xplus(&h_lab, a, p.f_thz)?;

    let mut jumps = Vec::new();
    for i in 0..2 {
        jumps.push((embed(&sigma_in_dressed(d.theta[i]), i, dims), p.gamma[i]));
    }
    jumps.push((xplus, p.kappa));
    LindbladModel::new(h, jumps)
}

/// Adiabatic model: cavity eliminated into the collective jump operator
/// L = sqrt(Gamma_1) xi_1 + sqrt(Gamma_2) xi_2 over the dressed two-qubit
/// space, with H = sum_i [(Delta_R,i/2) xi_z,i + c_i^2 (Omega_sb,i/2) xi_x,i]
/// - J xi_z,1 xi_z,2.
pub fn build_adiabatic_model(p: &SystemParams) -> Result<LindbladModel> {
    p.validate()?;
    let d = dressed_frame(p)?;
    let dd = doubly_dressed_frame(p, &d)?;
    let dims = vec![2usize, 2];
    let mut h = QMatrix::zeros(dims.clone());
    for i in 0..2 {
        let xz = embed(&sigma_z(), i, &dims);
        let xx = embed(&sigma_x(), i, &dims);
        h = h.add(&xz.scale(C64::new(d.delta_r[i] / 2.0, 0.0)));
        let w = d.cos_t[i] * d.cos_t[i] * p.omega_sb[i];
        h = h.add(&xx.scale(C64::new(w / 2.0, 0.0)));
    }
    let zz = embed(&sigma_z(), 0, &dims).matmul(&embed(&sigma_z(), 1, &dims));
    h = h.add(&zz.scale(C64::new(-d.j_coupling, 0.0)));

    let mut collective = QMatrix::zeros(dims.clone());
    for i in 0..2 {
        collective = collective.add(
            &embed(&sigma_minus(), i, &dims).scale(C64::new(dd.purcell[i].sqrt(), 0.0)),
        );
    }
    let mut jumps = vec![(collective, 1.0)];
    for i in 0..2 {
        jumps.push((embed(&sigma_in_dressed(d.theta[i]), i, &dims), p.gamma[i]));
    }
    LindbladModel::new(h, jumps)
}

/// Which index pairing the upward secular channel L_+ uses.
///
/// `IndexMatched` pairs sqrt(Gamma_i) c_i^2 with tau_i; it is the variant
/// obtained by splitting the collective jump operator into its rotating
/// components, and the one whose kernel contains the stabilized dark state.
/// `Crossed` pairs sqrt(Gamma_1) c_1^2 with tau_2 and vice versa.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LPlusConvention {
    #[default]
    IndexMatched,
    Crossed,
}

/// Doubly-dressed two-qubit model with the collective dissipation split into
/// the three secular channels
///
///   L_+ = sum_i sqrt(Gamma_i) c~_i^2 tau_i        (index-matched variant)
///   L_- = sum_i sqrt(Gamma_i) s~_i^2 tau_i^dag
///   L_z = sum_i sqrt(Gamma_i) c~_i s~_i tau_z,i
///
/// and H = sum_i (Omega~_R,i/2) tau_z,i
///        + J prod_i [ (c~_i^2 - s~_i^2) tau_z,i - 2 c~_i s~_i tau_x,i ].
///
/// With `gamma_on`, the bare decay (rotated through both dressing frames)
/// is added at gamma_i.
pub fn build_doubly_dressed_model(
    p: &SystemParams,
    convention: LPlusConvention,
    gamma_on: bool,
) -> Result<LindbladModel> {
    p.validate()?;
    let d = dressed_frame(p)?;
    let dd = doubly_dressed_frame(p, &d)?;
    let dims = vec![2usize, 2];
    let tz: Vec<QMatrix> = (0..2).map(|i| embed(&sigma_z(), i, &dims)).collect();
    let tx: Vec<QMatrix> = (0..2).map(|i| embed(&sigma_x(), i, &dims)).collect();
    let tm: Vec<QMatrix> = (0..2).map(|i| embed(&sigma_minus(), i, &dims)).collect();

    let mut h = QMatrix::zeros(dims.clone());
    for i in 0..2 {
        h = h.add(&tz[i].scale(C64::new(dd.omega_rt[i] / 2.0, 0.0)));
    }
    let factor = |i: usize| -> QMatrix {
        let c2s2 = dd.cos_t[i] * dd.cos_t[i] - dd.sin_t[i] * dd.sin_t[i];
        let cs = dd.cos_t[i] * dd.sin_t[i];
        tz[i].scale(C64::new(c2s2, 0.0)).sub(&tx[i].scale(C64::new(2.0 * cs, 0.0)))
    };
    h = h.add(&factor(0).matmul(&factor(1)).scale(C64::new(d.j_coupling, 0.0)));

    let sq = [dd.purcell[0].sqrt(), dd.purcell[1].sqrt()];
    let (p0, p1) = match convention {
        LPlusConvention::IndexMatched => (0usize, 1usize),
        LPlusConvention::Crossed => (1usize, 0usize),
    };
    let l_plus = tm[p0]
        .scale(C64::new(sq[0] * dd.cos_t[0] * dd.cos_t[0], 0.0))
        .add(&tm[p1].scale(C64::new(sq[1] * dd.cos_t[1] * dd.cos_t[1], 0.0)));
    let l_minus = tm[0]
        .dagger()
        .scale(C64::new(sq[0] * dd.sin_t[0] * dd.sin_t[0], 0.0))
        .add(&tm[1].dagger().scale(C64::new(sq[1] * dd.sin_t[1] * dd.sin_t[1], 0.0)));
    let l_z = tz[0]
        .scale(C64::new(sq[0] * dd.cos_t[0] * dd.sin_t[0], 0.0))
        .add(&tz[1].scale(C64::new(sq[1] * dd.cos_t[1] * dd.sin_t[1], 0.0)));

    let mut jumps = vec![(l_plus, 1.0), (l_minus, 1.0), (l_z, 1.0)];
    if gamma_on {
        for i in 0..2 {
            // sigma in the dressed frame, then rotated into the doubly-dressed frame
            let s_dressed = sigma_in_dressed(d.theta[i]);
            let v = frame_rotation(dd.theta[i]);
            let vd = v.t().mapv(|z| z.conj());
            let s_dd = lapack::matmul(&lapack::matmul(&vd.to_owned(), &s_dressed), &v);
            jumps.push((embed(&s_dd, i, &dims), p.gamma[i]));
        }
    }
    LindbladModel::new(h, jumps)
}

/// Unitary (on the two-emitter block) mapping dressed-frame operators to the
/// bare frame: columns are the dressed states in bare coordinates.
pub fn dressed_to_bare_rotation(d: &DressedFrame) -> Array2<C64> {
    kron_raw(&frame_rotation(d.theta[0]), &frame_rotation(d.theta[1]))
}

/// Unitary mapping doubly-dressed operators to the dressed frame.
pub fn doubly_to_dressed_rotation(dd: &DoublyDressedFrame) -> Array2<C64> {
    kron_raw(&frame_rotation(dd.theta[0]), &frame_rotation(dd.theta[1]))
}

/// Conjugate a two-emitter state from the dressed frame to the bare frame.
pub fn state_dressed_to_bare(rho: &QMatrix, d: &DressedFrame) -> QMatrix {
    let v = dressed_to_bare_rotation(d);
    let vd = v.t().mapv(|z| z.conj());
    QMatrix {
        data: lapack::matmul(&lapack::matmul(&v, &rho.data), &vd.to_owned()),
        dims: rho.dims.clone(),
    }
}

/// Conjugate a (dressed two-qubit x cavity) state to the bare frame on the
/// qubit factors.
pub fn state_dressed_to_bare_with_cavity(rho: &QMatrix, d: &DressedFrame) -> QMatrix {
    let n_fock = rho.dims[2];
    let v2 = dressed_to_bare_rotation(d);
    let v = kron_raw(&v2, &Array2::eye(n_fock));
    let vd = v.t().mapv(|z| z.conj());
    QMatrix {
        data: lapack::matmul(&lapack::matmul(&v, &rho.data), &vd.to_owned()),
        dims: rho.dims.clone(),
    }
}
