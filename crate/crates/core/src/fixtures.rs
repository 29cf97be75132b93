//! Worked examples used by tests, the acceptance suite and the CLI.

use num_complex::Complex64;

use crate::classical::RoadColoring;
use crate::dilation::TensorDilation;
use crate::quantum::State;
use crate::tensor::{diag_real, kron, real_matrix, ComplexMatrix};

fn shift() -> ComplexMatrix {
    real_matrix(&[&[0., 0., 0.], &[1., 0., 0.], &[0., 1., 0.]])
}

fn a_minus() -> ComplexMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    diag_real(&[1., h, h])
}

fn a_plus() -> ComplexMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    diag_real(&[h, h, 1.])
}

/// The 6×6 unitary `[[a₊, (i/√2)s*], [(i/√2)s, a]]` in environment-major
/// block form (block row and column index the environment).
pub fn qutrit_unitary_environment_major() -> ComplexMatrix {
    let s = shift();
    let i_half = Complex64::new(0.0, std::f64::consts::FRAC_1_SQRT_2);
    let blocks = [[a_plus(), s.adjoint() * i_half], [&s * i_half, a_minus()]];
    let mut u = ComplexMatrix::zeros(6, 6);
    for (bi, row) in blocks.iter().enumerate() {
        for (bj, b) in row.iter().enumerate() {
            u.view_mut((3 * bi, 3 * bj), (3, 3)).copy_from(b);
        }
    }
    u
}

pub fn qutrit_psi() -> State {
    State::from_diagonal(&[1. / 3., 2. / 3.]).expect("valid")
}

pub fn qutrit_phi() -> State {
    State::from_diagonal(&[4. / 7., 2. / 7., 1. / 7.]).expect("valid")
}

/// Qutrit dilation with a qubit environment whose diagonal restriction is the
/// three-state chain of [`three_state_coloring`].
pub fn qutrit_dilation() -> TensorDilation {
    TensorDilation::from_environment_major(&qutrit_unitary_environment_major(), qutrit_psi(), Some(qutrit_phi()))
        .expect("unitary with invariant state")
}

/// Closed-form Kraus operators `t₁…t₄` of the diagonal coupling of
/// [`qutrit_dilation`], acting on `C³ ⊗ C̄³`.
pub fn qutrit_coupling_kraus() -> [ComplexMatrix; 4] {
    let s = shift();
    let st = s.transpose();
    let (a, ap) = (a_minus(), a_plus());
    let r3 = 3f64.sqrt();
    let r6 = 6f64.sqrt();
    [
        kron(&ap, &ap).scale(r3 / 3.) + kron(&st, &st).scale(r6 / 6.),
        kron(&s, &ap).scale(r6 / 6.) - kron(&a, &st).scale(r3 / 3.),
        kron(&ap, &s).scale(r6 / 6.) - kron(&st, &a).scale(r3 / 3.),
        kron(&s, &s).scale(r3 / 6.) + kron(&a, &a).scale(r6 / 3.),
    ]
}

/// Three states `1, 2, 3` and colors `r, g, b` with probabilities
/// `1/3, 1/2, 1/6`; `g` is the identity, `r` moves down, `b` moves up.
pub fn three_state_coloring() -> RoadColoring {
    let labels = |xs: &[&str]| xs.iter().map(|x| x.to_string()).collect();
    RoadColoring::new(
        labels(&["1", "2", "3"]),
        labels(&["r", "g", "b"]),
        vec![vec![0, 0, 1], vec![0, 1, 2], vec![1, 2, 2]],
        vec![1. / 3., 1. / 2., 1. / 6.],
    )
    .expect("valid coloring")
}

/// `φ = |e₁⟩⟨e₁|` and `ψ = |+⟩⟨+|` on `M₂`.
pub fn qubit_pair() -> (State, State) {
    let phi = State::from_diagonal(&[1., 0.]).expect("valid");
    let psi = State::pure(&real_matrix(&[&[1.], &[1.]])).expect("valid");
    (phi, psi)
}
