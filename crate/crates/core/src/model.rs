//! Hamiltonians of the driven atom-cavity system, analytic dressed states,
//! quasi-energy ladders, and dipole transition-element machinery.
//!
//! Units: hbar = 1 and all rates are quoted in units of the coupling `g`
//! (so `g = 1.0` by convention). `kappa` is the *field* decay rate; the
//! conventional "cavity damping rate" is `2 kappa` and must be halved at the
//! configuration boundary via [`kappa_from_two_kappa_over_g`].

use crate::error::{Error, Result};
use crate::hilbert::{self, AtomState, HilbertSpec, Ket, Operator};
use crate::linalg::{self, I, ONE};
use ndarray::prelude::*;
use num_complex::Complex64 as C64;

/// Physical rates of the model (all >= 0, units of g).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Atom-cavity coupling rate (1.0 by convention).
    pub g: f64,
    /// Classical drive Rabi frequency Omega.
    pub omega: f64,
    /// Cavity-drive amplitude (used only by [`Drive::Cavity`]).
    pub epsilon: f64,
    /// Free-space atomic decay rate gamma.
    pub gamma: f64,
    /// Cavity *field* decay rate kappa (energy decay rate is 2 kappa).
    pub kappa: f64,
}

/// Convert the conventional "2 kappa / g" figure into the field rate kappa.
///
/// This is the single place where the factor of two is applied.
pub fn kappa_from_two_kappa_over_g(two_kappa_over_g: f64) -> f64 {
    two_kappa_over_g / 2.0
}

impl ModelParams {
    pub fn new(g: f64, omega: f64, epsilon: f64, gamma: f64, kappa: f64) -> Result<Self> {
        for (name, v) in [
            ("g", g),
            ("omega", omega),
            ("epsilon", epsilon),
            ("gamma", gamma),
            ("kappa", kappa),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "rate {name} must be finite and >= 0, got {v}"
                )));
            }
        }
        Ok(ModelParams {
            g,
            omega,
            epsilon,
            gamma,
            kappa,
        })
    }

    /// Atom-driven resonant system with g = 1.
    pub fn resonant(omega: f64, kappa: f64, gamma: f64) -> Result<Self> {
        ModelParams::new(1.0, omega, 0.0, gamma, kappa)
    }

    /// Displacement amplitude alpha = Omega / g.
    pub fn alpha(&self) -> Result<f64> {
        if self.g <= 0.0 {
            return Err(Error::InvalidInput(
                "alpha = Omega/g undefined for g = 0".into(),
            ));
        }
        Ok(self.omega / self.g)
    }

    /// Effective cavity-drive amplitude Omega kappa / g.
    pub fn eps_eff(&self) -> Result<f64> {
        if self.g <= 0.0 {
            return Err(Error::InvalidInput(
                "eps_eff = Omega kappa / g undefined for g = 0".into(),
            ));
        }
        Ok(self.omega * self.kappa / self.g)
    }

    /// The dimensionless combination `2 Omega kappa / g^2` controlling the
    /// quasi-energy ladder and the forbidden-transition strength.
    pub fn drive_damping_ratio(&self) -> Result<f64> {
        if self.g <= 0.0 {
            return Err(Error::InvalidInput(
                "2 Omega kappa / g^2 undefined for g = 0".into(),
            ));
        }
        Ok(2.0 * self.omega * self.kappa / (self.g * self.g))
    }

    /// Validity of the quasi-energy description: kappa < g^2 / (2 Omega),
    /// i.e. `2 Omega kappa < g^2`.
    pub fn quasi_energy_valid(&self) -> bool {
        2.0 * self.omega * self.kappa < self.g * self.g
    }
}

/// Drive variant selecting the Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Drive {
    /// Bare resonant interaction `i g (a^dag sigma_- - a sigma_+)`.
    None,
    /// Classical atom drive `+ i Omega (sigma_+ - sigma_-)`.
    Atom,
    /// Classical cavity drive `+ i epsilon (a^dag - a)`.
    Cavity,
    /// Cavity drive with the substitution `epsilon -> Omega kappa / g`.
    Effective,
}

/// Build the interaction Hamiltonian for the requested drive.
///
/// All variants are Hermitian (anti-Hermitian residue is checked to 1e-12).
pub fn hamiltonian(params: &ModelParams, spec: HilbertSpec, drive: Drive) -> Result<Operator> {
    let a = hilbert::annihilation(spec);
    let ad = a.adjoint();
    let (sm, sp, _sz) = hilbert::atomic_operators(spec);

    // i g (a^dag sigma_- - a sigma_+)
    let jc = ad
        .mul(&sm)?
        .sub(&a.mul(&sp)?)?
        .scale(I * C64::new(params.g, 0.0));

    let h = match drive {
        Drive::None => jc,
        Drive::Atom => {
            let d = sp.sub(&sm)?.scale(I * C64::new(params.omega, 0.0));
            jc.add(&d)?
        }
        Drive::Cavity => {
            let d = ad.sub(&a)?.scale(I * C64::new(params.epsilon, 0.0));
            jc.add(&d)?
        }
        Drive::Effective => {
            let eps = params.eps_eff()?;
            let d = ad.sub(&a)?.scale(I * C64::new(eps, 0.0));
            jc.add(&d)?
        }
    };

    let residue = h.hermiticity_residue();
    if residue > 1e-12 {
        return Err(Error::NonHermitian { residue });
    }
    Ok(h)
}

/// Dressed-state branch within a manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
    Ground,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
            Branch::Ground => 0.0,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Branch::Plus => '+',
            Branch::Minus => '-',
            Branch::Ground => '0',
        }
    }
}

/// Quasi-energy of manifold `n`: `+- sqrt(n) g [1 - (2 eps/g)^2]^(3/4)`.
///
/// Valid only for `2 eps / g < 1`; beyond that the quasi-energy-state
/// description breaks down and an error is returned.
pub fn quasi_energy(n: usize, branch: Branch, g: f64, eps: f64) -> Result<f64> {
    if g <= 0.0 {
        return Err(Error::InvalidInput("quasi_energy requires g > 0".into()));
    }
    let ratio = 2.0 * eps / g;
    if ratio >= 1.0 {
        return Err(Error::InvalidRegime { ratio });
    }
    if branch == Branch::Ground && n != 0 {
        return Err(Error::InvalidInput(
            "ground branch exists only in manifold 0".into(),
        ));
    }
    let scale = (1.0 - ratio * ratio).powf(0.75);
    Ok(branch.sign() * (n as f64).sqrt() * g * scale)
}

/// Modified coupling `g' = g [1 - (2 Omega kappa / g^2)^2]^(3/4)`; sets all
/// peak positions of the damped, driven ladder.
pub fn g_prime(params: &ModelParams) -> Result<f64> {
    let eps = params.eps_eff()?;
    quasi_energy(1, Branch::Plus, params.g, eps)
}

/// Dressed state of the undamped atom-driven system.
#[derive(Debug, Clone)]
pub struct DressedState {
    pub manifold: usize,
    pub branch: Branch,
    /// Energy in units of g.
    pub energy: f64,
    state: Ket,
}

impl DressedState {
    pub fn ket(&self) -> &Ket {
        &self.state
    }

    pub fn spec(&self) -> HilbertSpec {
        self.state.spec()
    }

    /// Wrap a numeric eigenvector as a dressed-state-like object.
    pub fn from_ket(manifold: usize, branch: Branch, energy: f64, state: Ket) -> Self {
        DressedState {
            manifold,
            branch,
            energy,
            state,
        }
    }
}

/// Analytic dressed states of the driven, undamped system:
/// `|phi_0> = D(alpha)|0,->` and
/// `|phi_n^+-> = D(alpha) (|n-1,+> +- i |n,->)/sqrt(2)` with energy `+- sqrt(n) g`.
pub fn dressed_state_analytic(
    n: usize,
    branch: Branch,
    alpha: f64,
    spec: HilbertSpec,
) -> Result<DressedState> {
    let bare: Ket = match branch {
        Branch::Ground => {
            if n != 0 {
                return Err(Error::InvalidInput(
                    "ground branch exists only in manifold 0".into(),
                ));
            }
            Ket::basis(spec, 0, AtomState::Ground)?
        }
        Branch::Plus | Branch::Minus => {
            if n == 0 {
                return Err(Error::InvalidInput(
                    "manifold 0 has only the ground branch".into(),
                ));
            }
            if n + 1 >= spec.fock_dim() {
                return Err(Error::InvalidInput(format!(
                    "manifold {n} needs n + 1 < fock_dim = {}",
                    spec.fock_dim()
                )));
            }
            let up = Ket::basis(spec, n - 1, AtomState::Excited)?;
            let dn = Ket::basis(spec, n, AtomState::Ground)?;
            let inv_sqrt2 = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            let amp = up.amplitudes().mapv(|z| z * inv_sqrt2)
                + dn.amplitudes()
                    .mapv(|z| z * inv_sqrt2 * I * C64::new(branch.sign(), 0.0));
            Ket::from_amplitudes(spec, amp)?
        }
    };
    let d = hilbert::displacement(spec, C64::new(alpha, 0.0))?;
    let state = d.apply(&bare)?;
    Ok(DressedState {
        manifold: n,
        branch,
        energy: branch.sign() * (n as f64).sqrt(),
        state,
    })
}

/// One numeric eigenmode of a Hermitian operator.
#[derive(Debug, Clone)]
pub struct EigenMode {
    pub energy: f64,
    pub state: Ket,
}

/// Full spectrum of a Hermitian operator, ascending, with orthonormal
/// eigenvectors. Non-Hermitian input (residue > 1e-10) is rejected.
pub fn eigen(h: &Operator) -> Result<Vec<EigenMode>> {
    let (w, v) = linalg::eigh_checked(h.matrix(), 1e-10)?;
    let spec = h.spec();
    Ok(w.iter()
        .enumerate()
        .map(|(k, &energy)| EigenMode {
            energy,
            state: Ket::from_amplitudes(spec, v.column(k).to_owned()).expect("dimension"),
        })
        .collect())
}

/// Dipole transition matrix element `<bra| sigma_- |ket>`.
pub fn transition_element(bra: &DressedState, ket: &DressedState) -> Result<C64> {
    if bra.spec() != ket.spec() {
        return Err(Error::SpecMismatch {
            expected: bra.spec().dim(),
            got: ket.spec().dim(),
        });
    }
    let (sm, _, _) = hilbert::atomic_operators(bra.spec());
    bra.ket().dot(&sm.apply(ket.ket())?)
}

/// Decomposition of a sigma_- matrix element over bare emission channels.
#[derive(Debug, Clone)]
pub struct ChannelDecomposition {
    /// `(n, A_n)` with `A_n = <bra|n,-><n,+|ket>`, the amplitude routed
    /// through the bare channel `|n,+> -> |n,->`.
    pub channels: Vec<(usize, C64)>,
    /// Sum over all channels; equals the direct transition element.
    pub total: C64,
}

/// Split `<bra| sigma_- |ket>` into bare-channel amplitudes.
///
/// Since `sigma_- = sum_n |n,-><n,+|`, the channel sum is complete and the
/// total reproduces [`transition_element`] identically.
pub fn channel_amplitudes(bra: &DressedState, ket: &DressedState) -> Result<ChannelDecomposition> {
    if bra.spec() != ket.spec() {
        return Err(Error::SpecMismatch {
            expected: bra.spec().dim(),
            got: ket.spec().dim(),
        });
    }
    let spec = bra.spec();
    let mut channels = Vec::with_capacity(spec.fock_dim());
    let mut total = C64::new(0.0, 0.0);
    for n in 0..spec.fock_dim() {
        let bra_amp = bra.ket().amplitudes()[spec.index(n, AtomState::Ground)].conj();
        let ket_amp = ket.ket().amplitudes()[spec.index(n, AtomState::Excited)];
        let a_n = bra_amp * ket_amp;
        total += a_n;
        channels.push((n, a_n));
    }
    Ok(ChannelDecomposition { channels, total })
}

/// Strength of the damping-induced manifold-2 -> 0 transition,
/// `|<chi_0| sigma_- |chi_2^+>|^2`, from numeric eigenstates of the effective
/// Hamiltonian. To lowest order this equals `(2 Omega kappa / g^2)^2` and
/// vanishes for a lossless cavity.
pub fn forbidden_strength(params: &ModelParams, spec: HilbertSpec) -> Result<f64> {
    if !params.quasi_energy_valid() {
        return Err(Error::InvalidRegime {
            ratio: params.drive_damping_ratio()?,
        });
    }
    let (s_small, e_small) = forbidden_strength_at(params, spec)?;
    let larger = HilbertSpec::new(spec.fock_dim() + 10)?;
    let (s_large, e_large) = forbidden_strength_at(params, larger)?;
    // truncation convergence policy: eigenvalues must be stable under
    // recomputation at fock_dim + 10
    for (a, b) in e_small.iter().zip(e_large.iter()) {
        if (a - b).abs() >= 1e-6 {
            return Err(Error::Numerical(format!(
                "forbidden_strength not converged at fock_dim {}: eigenvalue shift {:.3e}",
                spec.fock_dim(),
                (a - b).abs()
            )));
        }
    }
    let _ = s_small;
    Ok(s_large)
}

fn forbidden_strength_at(params: &ModelParams, spec: HilbertSpec) -> Result<(f64, [f64; 2])> {
    let h = hamiltonian(params, spec, Drive::Effective)?;
    let modes = eigen(&h)?;
    let eps = params.eps_eff()?;

    // perturbative chi_0 = |0,-> - (eps/g)|0,+>, used only for identification
    let mut chi0_target = Array1::<C64>::zeros(spec.dim());
    chi0_target[spec.index(0, AtomState::Ground)] = ONE;
    chi0_target[spec.index(0, AtomState::Excited)] = C64::new(-eps / params.g, 0.0);
    let chi0_target =
        Ket::from_amplitudes(spec, chi0_target)?.normalized();

    // chi_2^+ anchored on its eps -> 0 limit, the bare dressed state
    let phi2 = dressed_state_analytic(2, Branch::Plus, 0.0, spec)?;

    let chi0 = pick_by_overlap(&modes, &chi0_target)?;
    let chi2 = pick_by_overlap(&modes, phi2.ket())?;

    let (sm, _, _) = hilbert::atomic_operators(spec);
    let elem = chi0.state.dot(&sm.apply(&chi2.state)?)?;
    Ok((elem.norm_sqr(), [chi0.energy, chi2.energy]))
}

fn pick_by_overlap<'a>(modes: &'a [EigenMode], target: &Ket) -> Result<&'a EigenMode> {
    let mut overlaps = Vec::with_capacity(modes.len());
    for (k, m) in modes.iter().enumerate() {
        overlaps.push((m.state.dot(target)?.norm_sqr(), k));
    }
    overlaps.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let (first, idx) = overlaps[0];
    let second = overlaps.get(1).map(|o| o.0).unwrap_or(0.0);
    if first - second < 0.05 {
        return Err(Error::AmbiguousState { first, second });
    }
    Ok(&modes[idx])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use proptest::prelude::*;

    const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn spec(n: usize) -> HilbertSpec {
        HilbertSpec::new(n).unwrap()
    }

    #[test]
    fn eigenladder_undriven() {
        // spectrum contains +- sqrt(n) g up to the truncation edge
        let params = ModelParams::resonant(0.0, 0.0, 0.0).unwrap();
        let h = hamiltonian(&params, spec(40), Drive::None).unwrap();
        let modes = eigen(&h).unwrap();
        let energies: Vec<f64> = modes.iter().map(|m| m.energy).collect();
        for n in 0..=6 {
            for sgn in [1.0, -1.0] {
                let target = sgn * (n as f64).sqrt();
                let nearest = energies
                    .iter()
                    .map(|e| (e - target).abs())
                    .fold(f64::INFINITY, f64::min);
                assert!(nearest < 1e-8, "missing eigenvalue {target}");
            }
        }
    }

    #[test]
    fn atom_drive_zero_reduces_to_none() {
        let p = ModelParams::resonant(0.0, 0.0, 0.0).unwrap();
        let h_none = hamiltonian(&p, spec(12), Drive::None).unwrap();
        let h_atom = hamiltonian(&p, spec(12), Drive::Atom).unwrap();
        assert_eq!(h_none.matrix(), h_atom.matrix());
    }

    #[test]
    fn effective_equals_cavity_drive() {
        // Omega = 8/3, kappa = 0.015 -> eps_eff = 0.04
        let p_eff = ModelParams::resonant(8.0 / 3.0, 0.015, 0.0).unwrap();
        let p_cav = ModelParams::new(1.0, 0.0, 0.04, 0.0, 0.0).unwrap();
        let h_eff = hamiltonian(&p_eff, spec(16), Drive::Effective).unwrap();
        let h_cav = hamiltonian(&p_cav, spec(16), Drive::Cavity).unwrap();
        assert!(max_abs(&(h_eff.matrix() - h_cav.matrix())) < 1e-15);
    }

    #[test]
    fn all_drives_hermitian() {
        let p = ModelParams::new(1.0, 1.3, 0.2, 0.05, 0.04).unwrap();
        for d in [Drive::None, Drive::Atom, Drive::Cavity, Drive::Effective] {
            let h = hamiltonian(&p, spec(10), d).unwrap();
            assert!(h.hermiticity_residue() < 1e-12);
        }
    }

    #[test]
    fn quasi_energy_values() {
        assert_eq!(quasi_energy(0, Branch::Plus, 1.0, 0.3).unwrap(), 0.0);
        assert_eq!(quasi_energy(1, Branch::Plus, 1.0, 0.0).unwrap(), 1.0);
        // n = 2, eps = 0.04: sqrt(2) * 0.995196
        let e = quasi_energy(2, Branch::Plus, 1.0, 0.04).unwrap();
        assert!((e - 1.407420).abs() < 5e-6, "{e}");
        // invalid regime
        assert!(matches!(
            quasi_energy(1, Branch::Plus, 1.0, 0.5),
            Err(Error::InvalidRegime { .. })
        ));
    }

    #[test]
    fn quasi_energy_undriven_exact() {
        for n in 0..12 {
            let e = quasi_energy(n, Branch::Minus, 1.0, 0.0).unwrap();
            assert_eq!(e, -(n as f64).sqrt());
        }
    }

    #[test]
    fn g_prime_reference_values() {
        let p = ModelParams::resonant(8.0 / 3.0, 0.015, 0.0).unwrap();
        assert!((g_prime(&p).unwrap() - 0.995196).abs() < 1e-6);
        let p = ModelParams::resonant(16.0 / 3.0, 0.015, 0.0).unwrap();
        assert!((g_prime(&p).unwrap() - 0.980742).abs() < 1e-5);
        let p = ModelParams::resonant(8.0 / 3.0, 0.05, 0.0).unwrap();
        assert!((g_prime(&p).unwrap() - 0.946177).abs() < 1e-5);
        let p = ModelParams::resonant(8.0 / 3.0, 0.0, 0.0).unwrap();
        assert_eq!(g_prime(&p).unwrap(), 1.0);
    }

    #[test]
    fn dressed_state_alpha_zero_forms() {
        let s = spec(10);
        let phi0 = dressed_state_analytic(0, Branch::Ground, 0.0, s).unwrap();
        let g0 = Ket::basis(s, 0, AtomState::Ground).unwrap();
        assert!((phi0.ket().dot(&g0).unwrap().norm() - 1.0).abs() < 1e-14);
        assert_eq!(phi0.energy, 0.0);

        let phi1 = dressed_state_analytic(1, Branch::Plus, 0.0, s).unwrap();
        let up = Ket::basis(s, 0, AtomState::Excited).unwrap();
        let dn = Ket::basis(s, 1, AtomState::Ground).unwrap();
        let c_up = up.dot(phi1.ket()).unwrap();
        let c_dn = dn.dot(phi1.ket()).unwrap();
        assert!((c_up - C64::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-14);
        assert!((c_dn - C64::new(0.0, FRAC_1_SQRT_2)).norm() < 1e-14);
        assert_eq!(phi1.energy, 1.0);
    }

    #[test]
    fn dressed_state_matches_numeric_eigenvector() {
        // displaced analytic state vs numeric diagonalization of the
        // atom-driven Hamiltonian at Omega = 0.5 g, kappa = 0
        let s = spec(30);
        let alpha = 0.5;
        let p = ModelParams::resonant(alpha, 0.0, 0.0).unwrap();
        let h = hamiltonian(&p, s, Drive::Atom).unwrap();
        let modes = eigen(&h).unwrap();
        let phi1 = dressed_state_analytic(1, Branch::Plus, alpha, s).unwrap();
        let best = modes
            .iter()
            .map(|m| m.state.dot(phi1.ket()).unwrap().norm_sqr())
            .fold(0.0f64, f64::max);
        assert!(best > 1.0 - 1e-8, "overlap {best}");
    }

    #[test]
    fn dressed_state_range_checks() {
        let s = spec(6);
        assert!(dressed_state_analytic(0, Branch::Plus, 0.0, s).is_err());
        assert!(dressed_state_analytic(1, Branch::Ground, 0.0, s).is_err());
        assert!(dressed_state_analytic(5, Branch::Plus, 0.0, s).is_err());
    }

    #[test]
    fn eigen_rejects_non_hermitian() {
        let s = spec(4);
        let a = hilbert::annihilation(s);
        assert!(matches!(eigen(&a), Err(Error::NonHermitian { .. })));
    }

    #[test]
    fn eigen_zero_operator() {
        let s = spec(3);
        let z = Operator::from_matrix(s, Array2::zeros((6, 6))).unwrap();
        let modes = eigen(&z).unwrap();
        assert!(modes.iter().all(|m| m.energy == 0.0));
        // orthonormality
        for (i, a) in modes.iter().enumerate() {
            for (j, b) in modes.iter().enumerate() {
                let ov = a.state.dot(&b.state).unwrap().norm();
                if i == j {
                    assert!((ov - 1.0).abs() < 1e-8);
                } else {
                    assert!(ov < 1e-8);
                }
            }
        }
    }

    #[test]
    fn selection_rule_all_branches() {
        // forbidden elements vanish, allowed magnitudes are 1/2 between
        // excited manifolds and 1/sqrt(2) into the ground state, at any alpha
        let s = spec(60);
        for &alpha in &[0.0, 0.5, 8.0 / 3.0] {
            let phi0 = dressed_state_analytic(0, Branch::Ground, alpha, s).unwrap();
            let mut states = vec![phi0];
            for n in 1..=4 {
                for b in [Branch::Plus, Branch::Minus] {
                    states.push(dressed_state_analytic(n, b, alpha, s).unwrap());
                }
            }
            for bra in &states {
                for ket in &states {
                    let el = transition_element(bra, ket).unwrap().norm();
                    if ket.manifold >= 1 && bra.manifold + 1 == ket.manifold {
                        let expect = if bra.manifold == 0 { FRAC_1_SQRT_2 } else { 0.5 };
                        assert!(
                            (el - expect).abs() < 1e-8,
                            "alpha={alpha} {} -> {}: {el}",
                            ket.manifold,
                            bra.manifold
                        );
                    } else {
                        assert!(
                            el < 1e-10,
                            "alpha={alpha} {} -> {} should be forbidden: {el}",
                            ket.manifold,
                            bra.manifold
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn channel_cancellation_and_first_order() {
        let s = spec(40);
        let alpha = 0.1;
        let phi0 = dressed_state_analytic(0, Branch::Ground, alpha, s).unwrap();
        let phi2 = dressed_state_analytic(2, Branch::Plus, alpha, s).unwrap();
        let dec = channel_amplitudes(&phi0, &phi2).unwrap();

        // exact cancellation while individual channels are finite
        assert!(dec.total.norm() < 1e-10);
        assert!(dec.channels[0].1.norm() > 0.05);
        assert!(dec.channels[1].1.norm() > 0.05);

        // completeness: channel sum reproduces the direct element
        let direct = transition_element(&phi0, &phi2).unwrap();
        assert!((dec.total - direct).norm() < 1e-10);

        // first order in alpha: A_0 = -(alpha/sqrt(2)) e^{-alpha^2},
        // A_1 = +(alpha/sqrt(2)) (1 - alpha^2) e^{-alpha^2}; equal magnitude,
        // opposite sign, deviations O(alpha^3)
        let a0 = dec.channels[0].1;
        let a1 = dec.channels[1].1;
        let first_order = alpha * FRAC_1_SQRT_2;
        assert!((a0 + C64::new(first_order, 0.0)).norm() < alpha * alpha * alpha);
        assert!((a1 - C64::new(first_order, 0.0)).norm() < 2.0 * alpha * alpha * alpha);
        let exact0 = -first_order * (-alpha * alpha).exp();
        let exact1 = first_order * (1.0 - alpha * alpha) * (-alpha * alpha).exp();
        assert!((a0 - C64::new(exact0, 0.0)).norm() < 1e-12);
        assert!((a1 - C64::new(exact1, 0.0)).norm() < 1e-12);
        assert!((a0.norm() - a1.norm()).abs() < alpha.powi(3));
    }

    #[test]
    fn channel_amplitudes_zero_alpha() {
        let s = spec(12);
        let phi0 = dressed_state_analytic(0, Branch::Ground, 0.0, s).unwrap();
        let phi2 = dressed_state_analytic(2, Branch::Plus, 0.0, s).unwrap();
        let dec = channel_amplitudes(&phi0, &phi2).unwrap();
        for (_, a) in &dec.channels {
            assert!(a.norm() < 1e-15);
        }
    }

    #[test]
    fn forbidden_strength_lossless_is_zero() {
        let p = ModelParams::resonant(8.0 / 3.0, 0.0, 0.0).unwrap();
        let s = forbidden_strength(&p, spec(30)).unwrap();
        assert!(s < 1e-10, "{s}");
    }

    #[test]
    fn forbidden_strength_lowest_order() {
        // 2 Omega kappa / g^2 = 0.08 -> strength ~ 0.0064 within 10%
        let p = ModelParams::resonant(8.0 / 3.0, 0.015, 0.0).unwrap();
        let s = forbidden_strength(&p, spec(30)).unwrap();
        let x = p.drive_damping_ratio().unwrap();
        assert!((s / (x * x) - 1.0).abs() < 0.1, "ratio {}", s / (x * x));
    }

    #[test]
    fn forbidden_strength_quadratic_scaling() {
        // halving eps_eff quarters the strength
        let p1 = ModelParams::resonant(8.0 / 3.0, 0.00375, 0.0).unwrap(); // x = 0.02
        let p2 = ModelParams::resonant(8.0 / 3.0, 0.0075, 0.0).unwrap(); // x = 0.04
        let s1 = forbidden_strength(&p1, spec(30)).unwrap();
        let s2 = forbidden_strength(&p2, spec(30)).unwrap();
        assert!((s2 / s1 / 4.0 - 1.0).abs() < 0.05, "ratio {}", s2 / s1);
    }

    #[test]
    fn forbidden_strength_invalid_regime() {
        let p = ModelParams::resonant(8.0 / 3.0, 0.2, 0.0).unwrap(); // 2 Omega kappa = 1.07
        assert!(matches!(
            forbidden_strength(&p, spec(20)),
            Err(Error::InvalidRegime { .. })
        ));
    }

    #[test]
    fn displaced_frame_identity() {
        // D^dag(alpha) H_atom-drive D(alpha) = H_none when alpha = Omega/g.
        // Exact in the untruncated space; compared on the interior block,
        // since rows at the truncation edge carry O(g alpha sqrt(N)) cutoff
        // artifacts of the displaced ladder.
        let s = spec(30);
        let omega = 0.7;
        let p = ModelParams::resonant(omega, 0.0, 0.0).unwrap();
        let h_atom = hamiltonian(&p, s, Drive::Atom).unwrap();
        let h_none = hamiltonian(&p, s, Drive::None).unwrap();
        let d = hilbert::displacement(s, C64::new(omega, 0.0)).unwrap();
        let transformed = d.adjoint().mul(&h_atom).unwrap().mul(&d).unwrap();
        let interior = 2 * (s.fock_dim() / 2);
        let diff = transformed.matrix() - h_none.matrix();
        let mut worst = 0.0f64;
        for i in 0..interior {
            for j in 0..interior {
                worst = worst.max(diff[[i, j]].norm());
            }
        }
        assert!(worst < 1e-8, "interior deviation {worst:.3e}");
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(1.0, -0.1, 0.0, 0.0, 0.0).is_err());
        assert!(ModelParams::new(1.0, 0.0, 0.0, f64::NAN, 0.0).is_err());
        let p = ModelParams::resonant(8.0 / 3.0, 0.2, 0.0).unwrap();
        assert!(!p.quasi_energy_valid());
        let p = ModelParams::resonant(8.0 / 3.0, 0.015, 0.0).unwrap();
        assert!(p.quasi_energy_valid());
    }

    #[test]
    fn kappa_conversion_helper() {
        assert_eq!(kappa_from_two_kappa_over_g(0.03), 0.015);
        assert_eq!(kappa_from_two_kappa_over_g(0.1), 0.05);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn prop_quasi_energy_undriven(n in 0usize..40, g in 0.1f64..10.0) {
            let e = quasi_energy(n, Branch::Plus, g, 0.0).unwrap();
            prop_assert_eq!(e, (n as f64).sqrt() * g);
        }

        #[test]
        fn prop_channel_sum_is_transition_element(alpha in 0.0f64..1.5, n in 1usize..4) {
            let s = HilbertSpec::new(30).unwrap();
            let phi0 = dressed_state_analytic(0, Branch::Ground, alpha, s).unwrap();
            let phin = dressed_state_analytic(n, Branch::Plus, alpha, s).unwrap();
            let dec = channel_amplitudes(&phi0, &phin).unwrap();
            let direct = transition_element(&phi0, &phin).unwrap();
            prop_assert!((dec.total - direct).norm() < 1e-10);
        }
    }
}
