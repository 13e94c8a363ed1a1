//! Reference diagrams used throughout the tests and the CLI.

use crate::diagram::GridDiagram;

/// Knot B in L(5,1); nullhomotopic, grid number 2.
pub fn b() -> GridDiagram {
    GridDiagram::new(5, 1, 2, &[(0, 0), (1, 1)], &[(3, 0), (8, 1)])
}

/// Resolution of B: the trivial link diagram for index set (0,1,0,0,1).
pub fn b0() -> GridDiagram {
    GridDiagram::new(5, 1, 2, &[(0, 1), (1, 0)], &[(8, 1), (3, 0)])
}

/// B after its crossing change: a grid number 2 diagram of K0.
pub fn k0_two_column() -> GridDiagram {
    GridDiagram::new(5, 1, 2, &[(0, 1), (1, 0)], &[(9, 1), (2, 0)])
}

/// Knot L in L(5,1).
pub fn l() -> GridDiagram {
    GridDiagram::new(5, 1, 3, &[(1, 2), (2, 1), (12, 0)], &[(12, 2), (13, 1), (14, 0)])
}

pub fn l_plus() -> GridDiagram {
    GridDiagram::new(5, 1, 3, &[(0, 2), (2, 1), (13, 0)], &[(13, 2), (12, 1), (14, 0)])
}

/// The resolution panel of L as drawn (one column commutation away from
/// the literal O/X exchange).
pub fn l0_panel() -> GridDiagram {
    GridDiagram::new(5, 1, 3, &[(0, 2), (2, 1), (13, 0)], &[(12, 2), (13, 1), (14, 0)])
}

/// Member `k` of the family L_k in L(5,1), grid number `k + 2`.
///
/// Two O markings sit at the top left; the rest of the O markings and
/// all X markings run down two diagonals in the last parallelogram.
pub fn l_family(k: usize) -> GridDiagram {
    let g = k + 2;
    let last = 4 * g;
    let mut o = vec![(g - 2, g - 1), (g - 1, g - 2)];
    o.extend((0..k).map(|i| (last + i, g - 3 - i)));
    let x: Vec<_> = (0..g).map(|i| (last + i, g - 1 - i)).collect();
    GridDiagram::new(5, 1, g, &o, &x)
}

/// The grid number one knot K3 in L(7,2).
pub fn k3_in_l72() -> GridDiagram {
    GridDiagram::new(7, 2, 1, &[(0, 0)], &[(1, 0)])
}

/// The trivial link diagram for index set (0,1,2,0,3) in L(5,2), read off
/// its figure.
pub fn trivial_0_1_2_0_3() -> GridDiagram {
    let o: Vec<_> = (0..6).map(|i| (i, 5 - i)).collect();
    let x: Vec<_> = [18, 13, 14, 15, 10, 11]
        .iter()
        .enumerate()
        .map(|(i, &s)| (s, 5 - i))
        .collect();
    GridDiagram::new(5, 2, 6, &o, &x)
}

/// Degenerate grid number one unknot in L(p,q).
pub fn unknot(p: u32, q: i64) -> GridDiagram {
    GridDiagram::new(p, q, 1, &[(0, 0)], &[(0, 0)])
}

/// Right-handed trefoil in S^3 on a 5x5 grid (horizontal strands over).
pub fn right_trefoil() -> GridDiagram {
    GridDiagram::new(
        1,
        0,
        5,
        &[(4, 4), (3, 3), (2, 2), (1, 1), (0, 0)],
        &[(2, 4), (1, 3), (0, 2), (4, 1), (3, 0)],
    )
}

/// Mirror image of [`right_trefoil`].
pub fn left_trefoil() -> GridDiagram {
    GridDiagram::new(
        1,
        0,
        5,
        &[(0, 4), (1, 3), (2, 2), (3, 1), (4, 0)],
        &[(2, 4), (3, 3), (4, 2), (0, 1), (1, 0)],
    )
}
