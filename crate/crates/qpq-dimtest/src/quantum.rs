//! Exact complex linear algebra for small Hilbert spaces: kets, tensor
//! products, orthonormal (possibly incomplete) measurement bases, Born-rule
//! probabilities and weighted ensembles.
//!
//! Composite indices follow one fixed convention throughout the crate:
//! `k = i_B * dim_a + i_A` (Bob-major).

use num_complex::Complex64;
use rand::Rng;

use crate::{Error, Result, TOL};

/// A state vector in a small Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    amplitudes: Vec<Complex64>,
}

impl Ket {
    pub fn new(amplitudes: Vec<Complex64>) -> Self {
        assert!(!amplitudes.is_empty(), "ket must have positive dimension");
        Ket { amplitudes }
    }

    pub fn from_real(xs: &[f64]) -> Self {
        Ket::new(xs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Computational basis vector |idx> in dimension `dim`.
    pub fn basis(dim: usize, idx: usize) -> Self {
        assert!(idx < dim);
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[idx] = Complex64::new(1.0, 0.0);
        Ket { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, i: usize) -> Complex64 {
        self.amplitudes[i]
    }

    /// <self|other>
    pub fn inner(&self, other: &Ket) -> Complex64 {
        assert_eq!(self.dim(), other.dim(), "inner product dimension mismatch");
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(u, v)| u.conj() * v)
            .sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= TOL
    }

    pub fn scaled(&self, c: Complex64) -> Ket {
        Ket::new(self.amplitudes.iter().map(|a| a * c).collect())
    }

    pub fn normalized(&self) -> Ket {
        self.scaled(Complex64::new(1.0 / self.norm(), 0.0))
    }

    pub fn add(&self, other: &Ket) -> Ket {
        assert_eq!(self.dim(), other.dim());
        Ket::new(
            self.amplitudes
                .iter()
                .zip(&other.amplitudes)
                .map(|(u, v)| u + v)
                .collect(),
        )
    }

    pub fn sub(&self, other: &Ket) -> Ket {
        self.add(&other.scaled(Complex64::new(-1.0, 0.0)))
    }
}

/// |u> ⊗ |v>, index convention `i * dim(v) + j`.
pub fn tensor(u: &Ket, v: &Ket) -> Ket {
    let mut amplitudes = Vec::with_capacity(u.dim() * v.dim());
    for a in u.amplitudes() {
        for b in v.amplitudes() {
            amplitudes.push(a * b);
        }
    }
    Ket::new(amplitudes)
}

/// A normalized pure state of a Bob ⊗ Alice system.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteState {
    dim_b: usize,
    dim_a: usize,
    amplitudes: Vec<Complex64>,
}

impl BipartiteState {
    pub fn new(dim_b: usize, dim_a: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != dim_b * dim_a {
            return Err(Error::DimensionMismatch(format!(
                "expected {} amplitudes, got {}",
                dim_b * dim_a,
                amplitudes.len()
            )));
        }
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > TOL {
            return Err(Error::NotNormalized((norm_sqr - 1.0).abs()));
        }
        Ok(BipartiteState {
            dim_b,
            dim_a,
            amplitudes,
        })
    }

    /// Product state |b> ⊗ |a>.
    pub fn product(b: &Ket, a: &Ket) -> Result<Self> {
        let t = tensor(b, a);
        BipartiteState::new(b.dim(), a.dim(), t.amplitudes().to_vec())
    }

    /// Superposition Σ c_l |b_l>|a_l>, normalized check included.
    pub fn superposition(dim_b: usize, dim_a: usize, terms: &[(Complex64, Ket, Ket)]) -> Result<Self> {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim_b * dim_a];
        for (c, b, a) in terms {
            if b.dim() != dim_b || a.dim() != dim_a {
                return Err(Error::DimensionMismatch(
                    "superposition term dims differ from state dims".into(),
                ));
            }
            for i in 0..dim_b {
                for j in 0..dim_a {
                    amplitudes[i * dim_a + j] += c * b.amplitude(i) * a.amplitude(j);
                }
            }
        }
        BipartiteState::new(dim_b, dim_a, amplitudes)
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, i_b: usize, i_a: usize) -> Complex64 {
        self.amplitudes[i_b * self.dim_a + i_a]
    }

    /// <b_vec| ⊗ <a_vec| applied to the state.
    pub fn project(&self, b_vec: &Ket, a_vec: &Ket) -> Result<Complex64> {
        if b_vec.dim() != self.dim_b || a_vec.dim() != self.dim_a {
            return Err(Error::DimensionMismatch(format!(
                "projection vectors ({}, {}) against state ({}, {})",
                b_vec.dim(),
                a_vec.dim(),
                self.dim_b,
                self.dim_a
            )));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.dim_b {
            let bc = b_vec.amplitude(i).conj();
            if bc.norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..self.dim_a {
                acc += bc * a_vec.amplitude(j).conj() * self.amplitudes[i * self.dim_a + j];
            }
        }
        Ok(acc)
    }

    /// Born probability |(<b_vec| ⊗ <a_vec|)|state>|^2.
    pub fn born_probability(&self, b_vec: &Ket, a_vec: &Ket) -> Result<f64> {
        Ok(self.project(b_vec, a_vec)?.norm_sqr())
    }
}

/// A labeled orthonormal set of kets for one subsystem. When the listed
/// vectors do not span the ambient space the orthogonal complement is folded
/// into a single no-detect outcome carrying `completion_label`.
#[derive(Debug, Clone)]
pub struct MeasurementBasis {
    ambient_dim: usize,
    vectors: Vec<(String, Ket)>,
    completion_label: Option<String>,
    completion_vectors: Vec<Ket>,
}

impl MeasurementBasis {
    pub fn new(
        ambient_dim: usize,
        vectors: Vec<(String, Ket)>,
        completion_label: Option<String>,
    ) -> Result<Self> {
        let mut max_dev: f64 = 0.0;
        for (_, v) in &vectors {
            if v.dim() != ambient_dim {
                return Err(Error::DimensionMismatch(
                    "basis vector dim differs from ambient dim".into(),
                ));
            }
            max_dev = max_dev.max((v.norm_sqr() - 1.0).abs());
        }
        for (i, (_, u)) in vectors.iter().enumerate() {
            for (_, v) in vectors.iter().skip(i + 1) {
                max_dev = max_dev.max(u.inner(v).norm());
            }
        }
        if max_dev > TOL {
            return Err(Error::NotOrthonormal(max_dev));
        }
        if vectors.len() < ambient_dim && completion_label.is_none() {
            return Err(Error::InvalidParameter(
                "incomplete basis requires a completion label".into(),
            ));
        }
        let completion_vectors = if vectors.len() < ambient_dim {
            complement(ambient_dim, vectors.iter().map(|(_, v)| v))
        } else {
            Vec::new()
        };
        Ok(MeasurementBasis {
            ambient_dim,
            vectors,
            completion_label,
            completion_vectors,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn vectors(&self) -> &[(String, Ket)] {
        &self.vectors
    }

    pub fn completion_label(&self) -> Option<&str> {
        self.completion_label.as_deref()
    }

    /// Labels of all operational outcomes, completion (if any) last.
    pub fn outcome_labels(&self) -> Vec<&str> {
        let mut labels: Vec<&str> = self.vectors.iter().map(|(l, _)| l.as_str()).collect();
        if self.has_completion() {
            labels.push(self.completion_label.as_deref().unwrap());
        }
        labels
    }

    pub fn num_outcomes(&self) -> usize {
        self.vectors.len() + usize::from(self.has_completion())
    }

    pub fn has_completion(&self) -> bool {
        !self.completion_vectors.is_empty()
    }

    /// (outcome index, ket) pairs; the complement vectors all map onto the
    /// final (completion) outcome.
    pub fn effective_vectors(&self) -> Vec<(usize, &Ket)> {
        let mut out: Vec<(usize, &Ket)> = self
            .vectors
            .iter()
            .enumerate()
            .map(|(i, (_, v))| (i, v))
            .collect();
        let bot = self.vectors.len();
        for v in &self.completion_vectors {
            out.push((bot, v));
        }
        out
    }
}

/// Orthonormal basis of the orthogonal complement of `listed`, built by
/// Gram-Schmidt over the canonical basis.
fn complement<'a>(ambient_dim: usize, listed: impl Iterator<Item = &'a Ket>) -> Vec<Ket> {
    let mut span: Vec<Ket> = listed.cloned().collect();
    let target = ambient_dim - span.len();
    let mut out = Vec::with_capacity(target);
    for k in 0..ambient_dim {
        if out.len() == target {
            break;
        }
        let mut v = Ket::basis(ambient_dim, k);
        for u in &span {
            let c = u.inner(&v);
            v = v.sub(&u.scaled(c));
        }
        if v.norm_sqr() > 1e-6 {
            let v = v.normalized();
            span.push(v.clone());
            out.push(v);
        }
    }
    debug_assert_eq!(out.len(), target);
    out
}

/// Weighted mixture of bipartite pure states.
#[derive(Debug, Clone)]
pub struct StateEnsemble {
    members: Vec<(f64, BipartiteState)>,
}

impl StateEnsemble {
    pub fn new(members: Vec<(f64, BipartiteState)>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidEnsemble("empty ensemble".into()));
        }
        let (dim_b, dim_a) = (members[0].1.dim_b(), members[0].1.dim_a());
        let mut total = 0.0;
        for (w, s) in &members {
            if *w < 0.0 {
                return Err(Error::InvalidEnsemble("negative weight".into()));
            }
            if s.dim_b() != dim_b || s.dim_a() != dim_a {
                return Err(Error::InvalidEnsemble("members have differing dims".into()));
            }
            total += w;
        }
        if (total - 1.0).abs() > TOL {
            return Err(Error::InvalidEnsemble(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(StateEnsemble { members })
    }

    pub fn pure(state: BipartiteState) -> Self {
        StateEnsemble {
            members: vec![(1.0, state)],
        }
    }

    pub fn members(&self) -> &[(f64, BipartiteState)] {
        &self.members
    }

    pub fn dim_b(&self) -> usize {
        self.members[0].1.dim_b()
    }

    pub fn dim_a(&self) -> usize {
        self.members[0].1.dim_a()
    }
}

/// Joint outcome distribution of measuring Bob's side in `basis_b` and
/// Alice's side in `basis_a`, stored row-major over a fixed label ordering.
#[derive(Debug, Clone)]
pub struct JointDistribution {
    labels_b: Vec<String>,
    labels_a: Vec<String>,
    probs: Vec<f64>,
}

impl JointDistribution {
    pub fn labels_b(&self) -> &[String] {
        &self.labels_b
    }

    pub fn labels_a(&self) -> &[String] {
        &self.labels_a
    }

    pub fn prob(&self, i_b: usize, i_a: usize) -> f64 {
        self.probs[i_b * self.labels_a.len() + i_a]
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Inverse-CDF draw over the fixed row-major ordering; deterministic
    /// given the rng stream state.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> (usize, usize) {
        let u: f64 = rng.gen::<f64>() * self.total();
        let na = self.labels_a.len();
        let mut acc = 0.0;
        for (k, p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return (k / na, k % na);
            }
        }
        (self.probs.len() / na - 1, na - 1)
    }
}

/// Pr(label_b, label_a) aggregated over the ensemble, completion outcomes
/// included. Inner-product evaluation path.
pub fn joint_distribution(
    ens: &StateEnsemble,
    basis_b: &MeasurementBasis,
    basis_a: &MeasurementBasis,
) -> Result<JointDistribution> {
    if basis_b.ambient_dim() != ens.dim_b() || basis_a.ambient_dim() != ens.dim_a() {
        return Err(Error::DimensionMismatch(format!(
            "bases ({}, {}) against ensemble ({}, {})",
            basis_b.ambient_dim(),
            basis_a.ambient_dim(),
            ens.dim_b(),
            ens.dim_a()
        )));
    }
    let labels_b: Vec<String> = basis_b.outcome_labels().iter().map(|s| s.to_string()).collect();
    let labels_a: Vec<String> = basis_a.outcome_labels().iter().map(|s| s.to_string()).collect();
    let mut probs = vec![0.0; labels_b.len() * labels_a.len()];
    for (w, state) in ens.members() {
        for (ob, bv) in basis_b.effective_vectors() {
            for (oa, av) in basis_a.effective_vectors() {
                probs[ob * labels_a.len() + oa] += w * state.born_probability(bv, av)?;
            }
        }
    }
    Ok(JointDistribution {
        labels_b,
        labels_a,
        probs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn tensor_basis_products() {
        let t = tensor(&Ket::basis(2, 0), &Ket::basis(3, 0));
        assert_eq!(t.amplitude(0), c(1.0));
        assert_eq!(t.norm_sqr(), 1.0);

        let t = tensor(&Ket::basis(2, 1), &Ket::basis(3, 2));
        assert_eq!(t.amplitude(5), c(1.0));
    }

    #[test]
    fn tensor_plus_times_plus() {
        let s = 1.0 / 2f64.sqrt();
        let plus = Ket::from_real(&[s, s]);
        let t = tensor(&plus, &plus);
        for i in 0..4 {
            assert!((t.amplitude(i) - c(0.5)).norm() < TOL);
        }
    }

    #[test]
    fn born_orthogonal_first_factor_is_zero() {
        let theta: f64 = 0.7;
        let phi0 = Ket::from_real(&[(theta / 2.0).cos(), (theta / 2.0).sin(), 0.0]);
        let st = BipartiteState::product(&Ket::basis(2, 0), &phi0).unwrap();
        let p = st
            .born_probability(&Ket::basis(2, 1), &phi0)
            .unwrap();
        assert!(p.abs() < TOL);
    }

    #[test]
    fn born_same_subspace_entries() {
        let theta = std::f64::consts::FRAC_PI_3;
        let st = crate::families::same_subspace_state(theta, 0).unwrap();
        let (phi0, phi1) = crate::families::same_subspace_kets(theta, 0);
        let p = st.born_probability(&Ket::basis(2, 0), &phi0).unwrap();
        assert!((p - 0.5).abs() < TOL);
        let p = st.born_probability(&Ket::basis(2, 0), &phi1).unwrap();
        assert!((p - 0.5 * theta.cos() * theta.cos()).abs() < TOL);
        assert!((p - 0.125).abs() < TOL);
    }

    #[test]
    fn born_dimension_mismatch() {
        let st = crate::families::same_subspace_state(0.3, 0).unwrap();
        assert!(st
            .born_probability(&Ket::basis(3, 0), &Ket::basis(3, 0))
            .is_err());
    }

    #[test]
    fn incomplete_basis_requires_completion_label() {
        let v = vec![("0".to_string(), Ket::basis(3, 0))];
        assert!(MeasurementBasis::new(3, v.clone(), None).is_err());
        let b = MeasurementBasis::new(3, v, Some("⊥".into())).unwrap();
        assert_eq!(b.num_outcomes(), 2);
        assert_eq!(b.effective_vectors().len(), 3);
    }

    #[test]
    fn joint_distribution_point_mass() {
        let comp = MeasurementBasis::new(
            2,
            vec![
                ("0".into(), Ket::basis(2, 0)),
                ("1".into(), Ket::basis(2, 1)),
            ],
            None,
        )
        .unwrap();
        let tri = MeasurementBasis::new(
            3,
            (0..3)
                .map(|i| (i.to_string(), Ket::basis(3, i)))
                .collect(),
            None,
        )
        .unwrap();
        let st = BipartiteState::product(&Ket::basis(2, 1), &Ket::basis(3, 2)).unwrap();
        let d = joint_distribution(&StateEnsemble::pure(st), &comp, &tri).unwrap();
        assert!((d.prob(1, 2) - 1.0).abs() < TOL);
        assert!((d.total() - 1.0).abs() < TOL);
    }

    #[test]
    fn sample_point_mass_and_determinism() {
        let tri = MeasurementBasis::new(
            3,
            (0..3)
                .map(|i| (i.to_string(), Ket::basis(3, i)))
                .collect(),
        None,
        )
        .unwrap();
        let comp = MeasurementBasis::new(
            2,
            vec![
                ("0".into(), Ket::basis(2, 0)),
                ("1".into(), Ket::basis(2, 1)),
            ],
            None,
        )
        .unwrap();
        let st = BipartiteState::product(&Ket::basis(2, 0), &Ket::basis(3, 1)).unwrap();
        let d = joint_distribution(&StateEnsemble::pure(st), &comp, &tri).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            assert_eq!(d.sample(&mut rng), (0, 1));
        }

        let s = 1.0 / 2f64.sqrt();
        let st = BipartiteState::product(&Ket::from_real(&[s, s]), &Ket::basis(3, 0)).unwrap();
        let d = joint_distribution(&StateEnsemble::pure(st), &comp, &tri).unwrap();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..1000).map(|_| d.sample(&mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(42), draw(42));
    }

    #[test]
    fn sample_fair_coin_within_3_sigma() {
        let comp = MeasurementBasis::new(
            2,
            vec![
                ("0".into(), Ket::basis(2, 0)),
                ("1".into(), Ket::basis(2, 1)),
            ],
            None,
        )
        .unwrap();
        let one = MeasurementBasis::new(1, vec![("0".into(), Ket::basis(1, 0))], None).unwrap();
        let s = 1.0 / 2f64.sqrt();
        let st = BipartiteState::product(&Ket::from_real(&[s, s]), &Ket::basis(1, 0)).unwrap();
        let d = joint_distribution(&StateEnsemble::pure(st), &comp, &one).unwrap();
        let n = 1_000_000usize;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ones: usize = (0..n).map(|_| d.sample(&mut rng).0).sum();
        let mean = ones as f64 / n as f64;
        let sigma = (0.25 / n as f64).sqrt();
        assert!((mean - 0.5).abs() < 3.0 * sigma, "mean {mean}");
    }

    fn random_state(seed: u64, dim_b: usize, dim_a: usize) -> BipartiteState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amps: Vec<Complex64> = (0..dim_b * dim_a)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        BipartiteState::new(
            dim_b,
            dim_a,
            amps.into_iter().map(|a| a / norm).collect(),
        )
        .unwrap()
    }

    proptest! {
        #[test]
        fn marginals_match_single_subsystem_born(seed in 0u64..500) {
            let st = random_state(seed, 2, 3);
            let ens = StateEnsemble::pure(st.clone());
            let comp = MeasurementBasis::new(
                2,
                vec![("0".into(), Ket::basis(2, 0)), ("1".into(), Ket::basis(2, 1))],
                None,
            ).unwrap();
            let tri = MeasurementBasis::new(
                3,
                (0..3).map(|i| (i.to_string(), Ket::basis(3, i))).collect(),
                None,
            ).unwrap();
            let d = joint_distribution(&ens, &comp, &tri).unwrap();
            for ib in 0..2 {
                let marginal: f64 = (0..3).map(|ia| d.prob(ib, ia)).sum();
                // direct: sum of |amplitudes| over Bob row
                let direct: f64 = (0..3).map(|ia| st.amplitude(ib, ia).norm_sqr()).sum();
                prop_assert!((marginal - direct).abs() < TOL);
            }
            prop_assert!((d.total() - 1.0).abs() < TOL);
        }

        #[test]
        fn born_global_phase_invariant(seed in 0u64..500, phase in 0.0f64..std::f64::consts::TAU) {
            let st = random_state(seed, 2, 3);
            let rotated = BipartiteState::new(
                2, 3,
                st.amplitudes().iter().map(|a| a * Complex64::from_polar(1.0, phase)).collect(),
            ).unwrap();
            let b = Ket::from_real(&[0.6, 0.8]);
            let a = Ket::from_real(&[0.0, 0.6, 0.8]);
            let p1 = st.born_probability(&b, &a).unwrap();
            let p2 = rotated.born_probability(&b, &a).unwrap();
            prop_assert!((p1 - p2).abs() < TOL);
        }
    }
}
