//! Periodic frame transformations `𝒜(t) = exp(−iθ(t)S)` and the pictures
//! they induce on Hamiltonians.

use std::sync::Arc;

use nalgebra::Matrix2;

use crate::error::{Error, Result};
use crate::hamiltonian::{BasisPartition, Hamiltonian};
use crate::lattice::TimeDependentHamiltonian;
use crate::operator::{
    apply_local_left, apply_local_right, expm_hermitian, Axis, DenseOperator, Matrix, QubitRegister, Site, C64,
};
use crate::pulse::{check_support, Envelope, Harmonic, PhaseProfile};
use crate::quadrature::integrate;

const AVERAGE_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
enum Direction {
    /// `S = Σ σ^{axis}` on distinct sites, stored as (bit mask, axis).
    SiteWise(Vec<(usize, Axis)>),
    General,
}

/// The generator direction `S`, a phase profile `θ(t)` and the repetition count `k`.
#[derive(Clone, Debug)]
pub struct FrameGenerator {
    direction: DenseOperator,
    kind: Direction,
    profile: PhaseProfile,
    repetitions: usize,
}

impl FrameGenerator {
    /// `S = Σᵢ σ^{axisᵢ}_{siteᵢ}`; the frame factorizes into 2×2 rotations.
    pub fn site_wise(
        register: &Arc<QubitRegister>,
        factors: &[(Site, Axis)],
        profile: PhaseProfile,
        repetitions: usize,
    ) -> Result<Self> {
        check_repetitions(repetitions)?;
        let dim = register.dim();
        let mut s = Matrix::zeros(dim, dim);
        let mut bits = Vec::with_capacity(factors.len());
        for (i, &(site, axis)) in factors.iter().enumerate() {
            if factors[..i].iter().any(|(o, _)| *o == site) {
                return Err(Error::DuplicateSite(site));
            }
            s += DenseOperator::embed_pauli(register.clone(), site, axis)?.into_matrix();
            bits.push((register.bit(site)?, axis));
        }
        Ok(FrameGenerator {
            direction: DenseOperator::from_matrix(register.clone(), s)?,
            kind: Direction::SiteWise(bits),
            profile,
            repetitions,
        })
    }

    /// Arbitrary Hermitian `S`, exponentiated spectrally at each time.
    pub fn general(direction: DenseOperator, profile: PhaseProfile, repetitions: usize) -> Result<Self> {
        check_repetitions(repetitions)?;
        let dev = direction.hermiticity_deviation();
        if dev > crate::operator::HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        Ok(FrameGenerator { direction, kind: Direction::General, profile, repetitions })
    }

    pub fn register(&self) -> &Arc<QubitRegister> {
        self.direction.register()
    }

    pub fn direction(&self) -> &DenseOperator {
        &self.direction
    }

    pub fn profile(&self) -> PhaseProfile {
        self.profile
    }

    pub fn repetitions(&self) -> usize {
        self.repetitions
    }

    pub fn period(&self) -> f64 {
        self.profile.period()
    }

    pub fn total_time(&self) -> f64 {
        self.profile.period() * self.repetitions as f64
    }

    fn check_time(&self, t: f64) -> Result<()> {
        check_support(t, Some(self.total_time()))
    }

    /// `𝒜(t) = exp(−iθ(t)S)`.
    pub fn frame_unitary(&self, t: f64) -> Result<DenseOperator> {
        self.check_time(t)?;
        let mut m = Matrix::identity(self.register().dim(), self.register().dim());
        self.left_apply(self.profile.theta(t), &mut m);
        DenseOperator::from_matrix(self.register().clone(), m)
    }

    /// `m ← exp(−iθS)·m`.
    fn left_apply(&self, theta: f64, m: &mut Matrix) {
        match &self.kind {
            Direction::SiteWise(bits) => {
                for &(bit, axis) in bits {
                    apply_local_left(m, bit, &axis.rotation(theta));
                }
            }
            Direction::General => {
                let a = expm_hermitian(self.direction.matrix().clone(), theta);
                *m = &a * &*m;
            }
        }
    }

    /// `m ← exp(−iθS)·m·exp(iθS)`; a negative `theta` gives the inverse map.
    fn conjugate(&self, theta: f64, m: &mut Matrix) {
        match &self.kind {
            Direction::SiteWise(bits) => {
                for &(bit, axis) in bits {
                    let r = axis.rotation(theta);
                    let r_dag: Matrix2<C64> = r.adjoint();
                    apply_local_left(m, bit, &r);
                    apply_local_right(m, bit, &r_dag);
                }
            }
            Direction::General => {
                let a = expm_hermitian(self.direction.matrix().clone(), theta);
                *m = &a * &*m * a.adjoint();
            }
        }
    }

    /// `𝒜(t)·f(t)σ^{axis}_{site}·𝒜†(t)` as a closed-form term list. Sites
    /// outside the frame, or rotated about `axis` itself, are unchanged;
    /// otherwise `σ_b ↦ cos(2θ)σ_b − i sin(2θ)σ_aσ_b`.
    pub fn rotated_drive(&self, site: Site, axis: Axis, envelope: Envelope) -> Result<TimeDependentHamiltonian> {
        let Direction::SiteWise(bits) = &self.kind else {
            return Err(Error::InvalidParameter("closed-form rotation needs a site-wise frame".into()));
        };
        let register = self.register().clone();
        let bit = register.bit(site)?;
        let plain = DenseOperator::embed_pauli(register.clone(), site, axis)?;
        let h = TimeDependentHamiltonian::new(register.clone());
        let frame_axis = bits.iter().find(|(b, _)| *b == bit).map(|(_, a)| *a);
        match frame_axis {
            Some(a) if a != axis => {
                let partner = a.pauli() * axis.pauli() * C64::new(0.0, -1.0);
                let local = Matrix::from_fn(2, 2, |i, j| partner[(i, j)]);
                let partner = DenseOperator::embed_local(register, &[site], &local)?;
                let profile = self.profile;
                let cos =
                    Envelope::product(vec![envelope.clone(), Envelope::phase_harmonic(profile, 2.0, Harmonic::Cos)]);
                let sin = Envelope::product(vec![envelope, Envelope::phase_harmonic(profile, 2.0, Harmonic::Sin)]);
                h.with_term(cos, plain)?.with_term(sin, partner)
            }
            _ => h.with_term(envelope, plain),
        }
    }

    /// `i𝒜̇𝒜† = θ̇(t)S`, the drive that realizes the frame in the lab.
    pub fn correction_hamiltonian(&self) -> TimeDependentHamiltonian {
        TimeDependentHamiltonian::new(self.register().clone())
            .with_term(self.profile.rate_envelope(), self.direction.clone())
            .expect("direction is Hermitian on its own register")
    }
}

fn check_repetitions(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParameter("frame repetitions must be at least 1".into()));
    }
    Ok(())
}

/// Which way a [`FramePicture`] maps its inner Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrameMap {
    /// `𝒜†H𝒜 − θ̇S`.
    ToFrame,
    /// `𝒜H𝒜† + θ̇S`.
    FromFrame,
}

/// A Hamiltonian seen through a frame generator.
#[derive(Clone, Debug)]
pub struct FramePicture {
    frame: Arc<FrameGenerator>,
    inner: Arc<dyn Hamiltonian>,
    map: FrameMap,
}

impl FramePicture {
    pub fn new(frame: Arc<FrameGenerator>, inner: Arc<dyn Hamiltonian>, map: FrameMap) -> Result<Self> {
        if frame.register().as_ref() != inner.register().as_ref() {
            return Err(Error::RegisterMismatch);
        }
        Ok(FramePicture { frame, inner, map })
    }

    pub fn frame(&self) -> &FrameGenerator {
        &self.frame
    }
}

impl Hamiltonian for FramePicture {
    fn register(&self) -> &Arc<QubitRegister> {
        self.frame.register()
    }

    fn support_end(&self) -> Option<f64> {
        let end = self.frame.total_time();
        Some(self.inner.support_end().map_or(end, |e| e.min(end)))
    }

    fn shortest_period(&self) -> Option<f64> {
        let tau = self.frame.period();
        Some(self.inner.shortest_period().map_or(tau, |p| p.min(tau)))
    }

    fn accumulate(&self, t: f64, out: &mut Matrix) {
        let dim = self.register().dim();
        let mut h = Matrix::zeros(dim, dim);
        self.inner.accumulate(t, &mut h);
        let theta = self.frame.profile.theta(t);
        let rate = self.frame.profile.rate(t);
        let (angle, sign) = match self.map {
            FrameMap::ToFrame => (-theta, -1.0),
            FrameMap::FromFrame => (theta, 1.0),
        };
        if theta != 0.0 {
            self.frame.conjugate(angle, &mut h);
        }
        *out += h;
        if rate != 0.0 {
            out.zip_apply(self.frame.direction.matrix(), |o, s| *o += s * (sign * rate));
        }
    }

    fn connect(&self, partition: &mut BasisPartition) {
        self.inner.connect(partition);
        partition.connect_matrix(self.frame.direction.matrix());
    }
}

/// `t ↦ 𝒜†(t)H(t)𝒜(t) − θ̇(t)S`.
pub fn to_frame(frame: &Arc<FrameGenerator>, h: Arc<dyn Hamiltonian>) -> Result<FramePicture> {
    FramePicture::new(frame.clone(), h, FrameMap::ToFrame)
}

/// `t ↦ 𝒜(t)H(t)𝒜†(t) + θ̇(t)S`; inverse of [`to_frame`].
pub fn from_frame(frame: &Arc<FrameGenerator>, h: Arc<dyn Hamiltonian>) -> Result<FramePicture> {
    FramePicture::new(frame.clone(), h, FrameMap::FromFrame)
}

/// `(1/τ)∫ H_𝒜(t) dt` over the `segment`-th period (1-based).
pub fn average_hamiltonian(
    frame: &Arc<FrameGenerator>,
    h: Arc<dyn Hamiltonian>,
    segment: usize,
) -> Result<DenseOperator> {
    let k = frame.repetitions();
    if segment == 0 || segment > k {
        return Err(Error::SegmentOutOfRange { segment, count: k });
    }
    let picture = to_frame(frame, h)?;
    let tau = frame.period();
    let (a, b) = (tau * (segment - 1) as f64, tau * segment as f64);
    check_support(b, picture.support_end())?;
    let dim = frame.register().dim();
    let integral: Matrix = integrate(
        |t| {
            let mut m = Matrix::zeros(dim, dim);
            picture.accumulate(t, &mut m);
            m
        },
        a,
        b,
        AVERAGE_TOL * tau,
    )?;
    DenseOperator::from_matrix(frame.register().clone(), integral / C64::new(tau, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_drive, build_zz, DriveTerm, ZzEdge};
    use std::f64::consts::PI;

    fn qubit() -> (Arc<QubitRegister>, Site) {
        let s = Site::new(0, 0);
        (QubitRegister::new(vec![s]).unwrap(), s)
    }

    fn s1_like(gamma: f64, k: usize) -> (Arc<QubitRegister>, Arc<FrameGenerator>, f64, f64) {
        let g = Site::new(1, 1);
        let labels = vec![g, g.offset(-1, 0), g.offset(1, 0), g.offset(0, -1), g.offset(0, 1)];
        let reg = QubitRegister::new(labels).unwrap();
        let omega0 = 1.0;
        let t_gate = PI / (2.0 * omega0);
        let tau = t_gate / k as f64;
        let profile = PhaseProfile::new(gamma * k as f64 * omega0, tau).unwrap();
        let frame = FrameGenerator::site_wise(&reg, &[(g, Axis::X)], profile, k).unwrap();
        (reg, Arc::new(frame), omega0, t_gate)
    }

    #[test]
    fn unitary_at_zero_half_period_and_periodicity() {
        let (reg, s) = qubit();
        let (omega, tau) = (0.7, 1.3);
        let g = FrameGenerator::site_wise(&reg, &[(s, Axis::X)], PhaseProfile::new(omega, tau).unwrap(), 3).unwrap();
        let id = DenseOperator::identity(reg.clone());
        assert!(g.frame_unitary(0.0).unwrap().max_abs_diff(&id).unwrap() < 1e-15);
        assert!(g.frame_unitary(3.0 * tau).unwrap().max_abs_diff(&id).unwrap() < 1e-12);
        let half = g.frame_unitary(tau / 2.0).unwrap();
        let th = omega * tau / PI;
        let m = half.matrix();
        assert!((m[(0, 0)] - C64::new(th.cos(), 0.0)).norm() < 1e-14);
        assert!((m[(0, 1)] - C64::new(0.0, -th.sin())).norm() < 1e-14);
        let t = 0.37;
        let a = g.frame_unitary(t).unwrap();
        let b = g.frame_unitary(t + tau).unwrap();
        assert!(a.max_abs_diff(&b).unwrap() < 1e-12);
        assert!(g.frame_unitary(3.0 * tau + 0.1).is_err());
    }

    #[test]
    fn general_path_matches_site_wise() {
        let a = Site::new(0, 0);
        let b = Site::new(0, 1);
        let reg = QubitRegister::new(vec![a, b]).unwrap();
        let profile = PhaseProfile::new(2.2, 0.8).unwrap();
        let sw = FrameGenerator::site_wise(&reg, &[(a, Axis::X), (b, Axis::Y)], profile, 2).unwrap();
        let gen = FrameGenerator::general(sw.direction().clone(), profile, 2).unwrap();
        for t in [0.0, 0.13, 0.4, 1.1] {
            let d = sw.frame_unitary(t).unwrap().max_abs_diff(&gen.frame_unitary(t).unwrap()).unwrap();
            assert!(d < 1e-12, "t={t}: {d}");
        }
    }

    #[test]
    fn identity_frame_leaves_hamiltonian_unchanged() {
        let (reg, s) = qubit();
        let g = Arc::new(
            FrameGenerator::site_wise(&reg, &[(s, Axis::X)], PhaseProfile::new(0.0, 1.0).unwrap(), 1).unwrap(),
        );
        let h = build_drive(&reg, &[DriveTerm::y(s, Envelope::sin_squared(1.0, 1.0).unwrap())]).unwrap().into_shared();
        let p = to_frame(&g, h.clone()).unwrap();
        let q = from_frame(&g, h.clone()).unwrap();
        for t in [0.2, 0.5, 0.9] {
            let ref_h = h.evaluate(t).unwrap();
            assert!(p.evaluate(t).unwrap().max_abs_diff(&ref_h).unwrap() < 1e-15);
            assert!(q.evaluate(t).unwrap().max_abs_diff(&ref_h).unwrap() < 1e-15);
        }
    }

    #[test]
    fn zero_hamiltonian_maps_to_frame_term() {
        let (reg, s) = qubit();
        let profile = PhaseProfile::new(1.7, 0.9).unwrap();
        let g = Arc::new(FrameGenerator::site_wise(&reg, &[(s, Axis::Z)], profile, 2).unwrap());
        let zero = TimeDependentHamiltonian::new(reg.clone()).into_shared();
        let p = to_frame(&g, zero).unwrap();
        let sz = DenseOperator::embed_pauli(reg.clone(), s, Axis::Z).unwrap();
        for t in [0.1, 0.3, 1.2] {
            let expect = sz.scale(-profile.rate(t));
            assert!(p.evaluate(t).unwrap().max_abs_diff(&expect).unwrap() < 1e-15);
        }
    }

    #[test]
    fn correction_sign_reproduces_modulated_drive() {
        let (reg, frame, omega0, t_gate) = s1_like(4.8097, 4);
        let g = reg.labels()[0];
        let target = build_drive(&reg, &[DriveTerm::x(g, Envelope::sin_squared(omega0, t_gate).unwrap())]).unwrap();
        let lab = from_frame(&frame, target.clone().into_shared()).unwrap();
        let tau = frame.period();
        let omega1 = Envelope::sum(vec![
            Envelope::sin_squared(omega0, t_gate).unwrap(),
            Envelope::modulation(4.8097 * 4.0 * omega0, tau).unwrap(),
        ]);
        let literal = build_drive(&reg, &[DriveTerm::x(g, omega1)]).unwrap();
        for i in 0..=50 {
            let t = t_gate * i as f64 / 50.0;
            let d = lab.evaluate(t).unwrap().max_abs_diff(&literal.evaluate(t).unwrap()).unwrap();
            assert!(d < 1e-12, "t={t}: {d}");
        }
        let corr = frame.correction_hamiltonian();
        assert_eq!(corr.evaluate(0.0).unwrap().max_abs(), 0.0);
        let mean: Matrix = integrate(|t| corr.evaluate(t).unwrap().into_matrix(), 0.0, tau, 1e-13).unwrap();
        assert!(mean.iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn zero_crosstalk_frame_hamiltonian_is_bare_drive() {
        let (reg, frame, omega0, t_gate) = s1_like(4.8097, 4);
        let g = reg.labels()[0];
        let bare = build_drive(&reg, &[DriveTerm::x(g, Envelope::sin_squared(omega0, t_gate).unwrap())]).unwrap();
        let lab = from_frame(&frame, bare.clone().into_shared()).unwrap();
        let back = to_frame(&frame, Arc::new(lab)).unwrap();
        for i in 0..100 {
            let t = t_gate * (i as f64 + 0.5) / 100.0;
            let d = back.evaluate(t).unwrap().max_abs_diff(&bare.evaluate(t).unwrap()).unwrap();
            assert!(d < 1e-10);
        }
    }

    #[test]
    fn rotated_drive_matches_dense_conjugation() {
        let a = Site::new(0, 0);
        let b = Site::new(0, 1);
        let c = Site::new(1, 0);
        let reg = QubitRegister::new(vec![a, b, c]).unwrap();
        let profile = PhaseProfile::new(3.1, 0.7).unwrap();
        let frame = Arc::new(FrameGenerator::site_wise(&reg, &[(a, Axis::Y), (b, Axis::X)], profile, 3).unwrap());
        let env = Envelope::sin_squared(0.8, 2.1).unwrap();
        for (site, axis) in [(a, Axis::X), (a, Axis::Z), (a, Axis::Y), (b, Axis::Y), (c, Axis::X)] {
            let closed = frame.rotated_drive(site, axis, env.clone()).unwrap();
            let drive = TimeDependentHamiltonian::new(reg.clone())
                .with_term(env.clone(), DenseOperator::embed_pauli(reg.clone(), site, axis).unwrap())
                .unwrap();
            let dense = from_frame(&frame, drive.into_shared()).unwrap();
            let corr = frame.correction_hamiltonian();
            for t in [0.05, 0.33, 0.9, 1.7] {
                let expect = &dense.evaluate(t).unwrap() - &corr.evaluate(t).unwrap();
                let d = closed.evaluate(t).unwrap().max_abs_diff(&expect).unwrap();
                assert!(d < 1e-13, "{site} {axis} t={t}: {d}");
            }
        }
    }

    #[test]
    fn average_at_gamma_zero_is_unrotated() {
        let (reg, frame, _, _) = s1_like(0.0, 4);
        let g = reg.labels()[0];
        let eta = 0.3;
        let edges: Vec<_> = reg.labels()[1..].iter().map(|s| ZzEdge::new(g, *s, eta).unwrap()).collect();
        let zz = build_zz(&reg, &edges).unwrap();
        let avg = average_hamiltonian(&frame, zz.clone().into_shared(), 2).unwrap();
        assert!(avg.max_abs_diff(&zz.evaluate(0.0).unwrap()).unwrap() < 1e-10);
        assert!(matches!(average_hamiltonian(&frame, zz.into_shared(), 5), Err(Error::SegmentOutOfRange { .. })));
    }

    #[test]
    fn average_of_bare_drive_is_segment_mean() {
        let (reg, frame, omega0, t_gate) = s1_like(4.8097, 4);
        let g = reg.labels()[0];
        let env = Envelope::sin_squared(omega0, t_gate).unwrap();
        let bare = build_drive(&reg, &[DriveTerm::x(g, env.clone())]).unwrap();
        let tau = frame.period();
        let avg = average_hamiltonian(&frame, bare.into_shared(), 3).unwrap();
        let x = DenseOperator::embed_pauli(reg.clone(), g, Axis::X).unwrap();
        let expect = x.scale(env.area(2.0 * tau, 3.0 * tau).unwrap() / tau);
        assert!(avg.max_abs_diff(&expect).unwrap() < 1e-10);
    }
}
