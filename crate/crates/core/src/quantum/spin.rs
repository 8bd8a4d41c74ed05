use super::Operator;
use crate::C64;

/// Pauli matrices `(σx, σy, σz)` in the basis `(|↑⟩, |↓⟩)`.
pub fn pauli() -> (Operator, Operator, Operator) {
    let o = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let x = Operator::from_rows(2, &[o, one, one, o]).unwrap();
    let y = Operator::from_rows(2, &[o, -i, i, o]).unwrap();
    let z = Operator::from_rows(2, &[one, o, o, -one]).unwrap();
    (x, y, z)
}

/// Cartesian spin-j matrices.
#[derive(Clone, Debug)]
pub struct SpinOperators {
    pub x: Operator,
    pub y: Operator,
    pub z: Operator,
}

impl SpinOperators {
    pub fn two_j(&self) -> usize {
        self.z.dim() - 1
    }

    /// `n·J`.
    pub fn along(&self, n: [f64; 3]) -> Operator {
        &(&(&self.x * n[0]) + &(&self.y * n[1])) + &(&self.z * n[2])
    }
}

/// Spin-j operators for `j = two_j / 2`, basis ordered `m = j, j−1, …, −j`.
pub fn spin_operators(two_j: usize) -> SpinOperators {
    let dim = two_j + 1;
    let j = two_j as f64 / 2.0;
    let m = |k: usize| j - k as f64;
    // ⟨m+1|J+|m⟩ = √(j(j+1) − m(m+1)); row k−1 is m+1 when column k is m
    let raise = Operator::from_fn(dim, |r, c| {
        if c >= 1 && r == c - 1 {
            let mc = m(c);
            C64::new((j * (j + 1.0) - mc * (mc + 1.0)).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let lower = raise.adjoint();
    let x = &(&raise + &lower) * 0.5;
    let y = (&raise - &lower).scale(C64::new(0.0, -0.5));
    let z = Operator::diagonal(&(0..dim).map(m).collect::<Vec<_>>());
    SpinOperators { x, y, z }
}
