//! Constructors for every parametrized state and basis used by the protocol
//! and the certification game, including the two orbital-angular-momentum
//! encodings that inject a qutrit into the 4-dimensional
//! {|H,+1>, |V,+1>, |H,-1>, |V,-1>} ambient space.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_8};

use crate::quantum::{BipartiteState, Ket, MeasurementBasis, StateEnsemble};
use crate::{Error, Result};

pub const NO_DETECT_LABEL: &str = "⊥";

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Which of the four Alice-side state families a supply belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum FamilyKind {
    GeneralQutrit,
    SameSubspace,
    DiffSubspace,
    ProductPair,
}

impl FamilyKind {
    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::GeneralQutrit => "general",
            FamilyKind::SameSubspace => "same-subspace",
            FamilyKind::DiffSubspace => "diff-subspace",
            FamilyKind::ProductPair => "product",
        }
    }
}

impl std::str::FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "general" => Ok(FamilyKind::GeneralQutrit),
            "same" | "same-subspace" => Ok(FamilyKind::SameSubspace),
            "diff" | "diff-subspace" => Ok(FamilyKind::DiffSubspace),
            "product" => Ok(FamilyKind::ProductPair),
            other => Err(Error::InvalidParameter(format!("unknown family `{other}`"))),
        }
    }
}

/// Angles and cyclic offset selecting one member of a family.
#[derive(Debug, Clone, Copy)]
pub struct FamilyParams {
    pub theta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub offset_i: usize,
    pub kind: FamilyKind,
}

impl FamilyParams {
    pub fn general(theta: f64, gamma: f64, delta: f64, offset_i: usize) -> Result<Self> {
        let p = FamilyParams {
            theta,
            gamma,
            delta,
            offset_i,
            kind: FamilyKind::GeneralQutrit,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("theta", self.theta), ("gamma", self.gamma), ("delta", self.delta)] {
            if !(0.0..=FRAC_PI_2 + 1e-15).contains(&v) {
                return Err(Error::InvalidParameter(format!(
                    "{name} = {v} outside [0, pi/2]"
                )));
            }
        }
        if self.offset_i > 2 {
            return Err(Error::InvalidParameter(format!(
                "offset_i = {} outside {{0,1,2}}",
                self.offset_i
            )));
        }
        Ok(())
    }
}

/// Qutrit ket with the given components at the cyclic positions
/// |i>, |i+1>, |i+2> (indices mod 3).
pub fn cyclic_ket(offset_i: usize, c0: f64, c1: f64, c2: f64) -> Ket {
    let mut amps = [0.0; 3];
    amps[offset_i % 3] = c0;
    amps[(offset_i + 1) % 3] = c1;
    amps[(offset_i + 2) % 3] = c2;
    Ket::from_real(&amps)
}

/// (phi_0, phi_1) of the general three-angle family.
pub fn general_qutrit_kets(p: &FamilyParams) -> (Ket, Ket) {
    let (st, ct) = p.theta.sin_cos();
    let (sg, cg) = p.gamma.sin_cos();
    let (sd, cd) = p.delta.sin_cos();
    let a = cg * cd;
    let b = ct * sd - st * sg * cd;
    let c = st * sd + ct * sg * cd;
    (
        cyclic_ket(p.offset_i, a, b, c),
        cyclic_ket(p.offset_i, b, a, -c),
    )
}

/// (1/sqrt2)(|0>|phi_0> + |1>|phi_1>) for the general family.
pub fn general_qutrit_state(p: &FamilyParams) -> Result<BipartiteState> {
    p.validate()?;
    let (phi0, phi1) = general_qutrit_kets(p);
    entangled_pair(&phi0, &phi1)
}

/// (phi_0, phi_1) = cos(theta/2)|i> ± sin(theta/2)|i+1>.
pub fn same_subspace_kets(theta: f64, offset_i: usize) -> (Ket, Ket) {
    let (s, c) = (theta / 2.0).sin_cos();
    (
        cyclic_ket(offset_i, c, s, 0.0),
        cyclic_ket(offset_i, c, -s, 0.0),
    )
}

pub fn same_subspace_state(theta: f64, offset_i: usize) -> Result<BipartiteState> {
    let (phi0, phi1) = same_subspace_kets(theta, offset_i);
    entangled_pair(&phi0, &phi1)
}

/// phi_0 = cos(theta)|i+1> + sin(theta)|i+2>, phi_1 = cos(theta)|i> - sin(theta)|i+2>.
pub fn diff_subspace_kets(theta: f64, offset_i: usize) -> (Ket, Ket) {
    let (s, c) = theta.sin_cos();
    (
        cyclic_ket(offset_i, 0.0, c, s),
        cyclic_ket(offset_i, c, 0.0, -s),
    )
}

pub fn diff_subspace_state(theta: f64, offset_i: usize) -> Result<BipartiteState> {
    let (phi0, phi1) = diff_subspace_kets(theta, offset_i);
    entangled_pair(&phi0, &phi1)
}

fn entangled_pair(phi0: &Ket, phi1: &Ket) -> Result<BipartiteState> {
    let c = Complex64::new(SQRT_HALF, 0.0);
    BipartiteState::superposition(
        2,
        phi0.dim(),
        &[
            (c, Ket::basis(2, 0), phi0.clone()),
            (c, Ket::basis(2, 1), phi1.clone()),
        ],
    )
}

/// Half/half mixture of |0>|phi_0> and |1>|phi_1> with the same-subspace kets.
pub fn product_ensemble(theta: f64, offset_i: usize) -> Result<StateEnsemble> {
    let (phi0, phi1) = same_subspace_kets(theta, offset_i);
    StateEnsemble::new(vec![
        (0.5, BipartiteState::product(&Ket::basis(2, 0), &phi0)?),
        (0.5, BipartiteState::product(&Ket::basis(2, 1), &phi1)?),
    ])
}

/// Supply ensemble for one of the three game families at a given angle.
pub fn supply_ensemble(kind: FamilyKind, theta: f64, offset_i: usize) -> Result<StateEnsemble> {
    match kind {
        FamilyKind::SameSubspace => Ok(StateEnsemble::pure(same_subspace_state(theta, offset_i)?)),
        FamilyKind::DiffSubspace => Ok(StateEnsemble::pure(diff_subspace_state(theta, offset_i)?)),
        FamilyKind::ProductPair => product_ensemble(theta, offset_i),
        FamilyKind::GeneralQutrit => Err(Error::InvalidParameter(
            "general family needs gamma/delta; use general_qutrit_state".into(),
        )),
    }
}

/// Primed (`y_basis_selector = 0`) or double-primed (`= 1`) triad for Alice's
/// side of the game. The printed kets carry a stray 1/sqrt2 prefactor; the
/// orthonormalized triad is used here.
pub fn game_bases(y_basis_selector: u8, offset_i: usize) -> MeasurementBasis {
    let (angle, tick) = match y_basis_selector {
        0 => (FRAC_PI_8, "'"),
        1 => (3.0 * FRAC_PI_8, "''"),
        other => panic!("basis selector {other} outside {{0,1}}"),
    };
    let (s, c) = angle.sin_cos();
    MeasurementBasis::new(
        3,
        vec![
            (format!("0{tick}"), cyclic_ket(offset_i, c, s, 0.0)),
            (format!("1{tick}"), cyclic_ket(offset_i, s, -c, 0.0)),
            (format!("2{tick}"), cyclic_ket(offset_i, 0.0, 0.0, 1.0)),
        ],
        None,
    )
    .expect("game triad is orthonormal by construction")
}

/// Computational {|0>,|1>} basis on Bob's qubit.
pub fn computational_basis() -> MeasurementBasis {
    MeasurementBasis::new(
        2,
        vec![
            ("0".into(), Ket::basis(2, 0)),
            ("1".into(), Ket::basis(2, 1)),
        ],
        None,
    )
    .unwrap()
}

/// Diagonal {|+>,|->} basis on Bob's qubit.
pub fn diagonal_basis() -> MeasurementBasis {
    MeasurementBasis::new(
        2,
        vec![
            ("+".into(), Ket::from_real(&[SQRT_HALF, SQRT_HALF])),
            ("-".into(), Ket::from_real(&[SQRT_HALF, -SQRT_HALF])),
        ],
        None,
    )
    .unwrap()
}

/// One of the two qutrit-in-photon encodings. Both map 0 -> |H,+1> and
/// 1 -> |V,+1>; they differ on where logical |2> lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum Encoding {
    /// |2> = |H,-1> (ambient index 2)
    HMinus,
    /// |2> = |V,-1> (ambient index 3)
    VMinus,
}

impl Encoding {
    pub fn inject(self, logical: usize) -> usize {
        match (self, logical) {
            (_, 0) => 0,
            (_, 1) => 1,
            (Encoding::HMinus, 2) => 2,
            (Encoding::VMinus, 2) => 3,
            _ => panic!("logical index {logical} outside {{0,1,2}}"),
        }
    }

    pub fn other(self) -> Encoding {
        match self {
            Encoding::HMinus => Encoding::VMinus,
            Encoding::VMinus => Encoding::HMinus,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Encoding::HMinus => "H-minus",
            Encoding::VMinus => "V-minus",
        }
    }
}

impl std::str::FromStr for Encoding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hminus" | "h-minus" => Ok(Encoding::HMinus),
            "vminus" | "v-minus" => Ok(Encoding::VMinus),
            other => Err(Error::InvalidParameter(format!("unknown encoding `{other}`"))),
        }
    }
}

/// Re-index a dim-3 Alice ket into the dim-4 ambient space.
pub fn embed_ket(ket: &Ket, enc: Encoding) -> Ket {
    assert_eq!(ket.dim(), 3, "only qutrit kets are embedded");
    let mut amps = vec![Complex64::new(0.0, 0.0); 4];
    for logical in 0..3 {
        amps[enc.inject(logical)] = ket.amplitude(logical);
    }
    Ket::new(amps)
}

/// Embed the Alice side of a (2 x 3) bipartite state into ambient dim 4.
pub fn embed_state(state: &BipartiteState, enc: Encoding) -> BipartiteState {
    assert_eq!(state.dim_a(), 3);
    let mut amps = vec![Complex64::new(0.0, 0.0); state.dim_b() * 4];
    for i_b in 0..state.dim_b() {
        for logical in 0..3 {
            amps[i_b * 4 + enc.inject(logical)] = state.amplitude(i_b, logical);
        }
    }
    BipartiteState::new(state.dim_b(), 4, amps).expect("embedding is an isometry")
}

pub fn embed_ensemble(ens: &StateEnsemble, enc: Encoding) -> StateEnsemble {
    StateEnsemble::new(
        ens.members()
            .iter()
            .map(|(w, s)| (*w, embed_state(s, enc)))
            .collect(),
    )
    .expect("embedding preserves weights and dims")
}

/// Embed a dim-3 Alice-side basis into ambient dim 4; the leftover ambient
/// direction becomes an explicit no-detect outcome.
pub fn embed_basis(basis: &MeasurementBasis, enc: Encoding) -> MeasurementBasis {
    assert_eq!(basis.ambient_dim(), 3);
    let vectors = basis
        .vectors()
        .iter()
        .map(|(l, v)| (l.clone(), embed_ket(v, enc)))
        .collect();
    MeasurementBasis::new(4, vectors, Some(NO_DETECT_LABEL.into()))
        .expect("embedded triad stays orthonormal")
}
