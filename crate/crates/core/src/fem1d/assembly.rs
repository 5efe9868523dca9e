use super::banded::BandedMatrix;
use super::mesh::{Mesh, QuadValues, GAUSS_POINTS, GAUSS_WEIGHTS};
use crate::field::Field;

/// Element shape values `[N0, N1]` at each Gauss point.
const SHAPE: [[f64; 2]; 3] = [
    [1.0 - GAUSS_POINTS[0], GAUSS_POINTS[0]],
    [1.0 - GAUSS_POINTS[1], GAUSS_POINTS[1]],
    [1.0 - GAUSS_POINTS[2], GAUSS_POINTS[2]],
];

/// Reference shape derivatives times `dx`.
const SLOPE: [f64; 2] = [-1.0, 1.0];

fn assemble(
    mesh: &Mesh,
    weight: &QuadValues,
    local: impl Fn(&[f64; 3], usize, usize) -> f64,
) -> BandedMatrix {
    assert_eq!(weight.n_elements(), mesh.n_elements());
    let mut m = BandedMatrix::zeros(mesh.n_nodes(), 1);
    for (e, w) in weight.0.iter().enumerate() {
        for a in 0..2 {
            for b in 0..2 {
                m.add(e + a, e + b, local(w, a, b));
            }
        }
    }
    m
}

/// `∫ w φ_i φ_j dx` with `w` given at the quadrature points.
pub fn mass_with(mesh: &Mesh, weight: &QuadValues) -> BandedMatrix {
    let dx = mesh.dx();
    assemble(mesh, weight, |w, a, b| {
        dx * (0..3)
            .map(|q| GAUSS_WEIGHTS[q] * w[q] * SHAPE[q][a] * SHAPE[q][b])
            .sum::<f64>()
    })
}

/// `∫ w φ_i' φ_j' dx`.
pub fn stiffness_with(mesh: &Mesh, weight: &QuadValues) -> BandedMatrix {
    let dx = mesh.dx();
    assemble(mesh, weight, |w, a, b| {
        let avg: f64 = (0..3).map(|q| GAUSS_WEIGHTS[q] * w[q]).sum();
        SLOPE[a] * SLOPE[b] * avg / dx
    })
}

/// `C_ij = ∫ w φ_i' φ_j dx` (row index carries the derivative).
pub fn convection_with(mesh: &Mesh, weight: &QuadValues) -> BandedMatrix {
    assemble(mesh, weight, |w, a, b| {
        SLOPE[a]
            * (0..3)
                .map(|q| GAUSS_WEIGHTS[q] * w[q] * SHAPE[q][b])
                .sum::<f64>()
    })
}

pub fn assemble_mass(mesh: &Mesh) -> BandedMatrix {
    mass_with(mesh, &QuadValues::constant(mesh.n_elements(), 1.0))
}

pub fn assemble_stiffness(mesh: &Mesh) -> BandedMatrix {
    stiffness_with(mesh, &QuadValues::constant(mesh.n_elements(), 1.0))
}

/// Weighted mass matrix for a nodal (piecewise-linear) weight.
pub fn assemble_weighted_mass(mesh: &Mesh, weight: &Field) -> BandedMatrix {
    mass_with(mesh, &mesh.interpolate(weight))
}

pub fn assemble_weighted_stiffness(mesh: &Mesh, weight: &Field) -> BandedMatrix {
    stiffness_with(mesh, &mesh.interpolate(weight))
}

pub fn assemble_weighted_convection(mesh: &Mesh, weight: &Field) -> BandedMatrix {
    convection_with(mesh, &mesh.interpolate(weight))
}

/// `b_i = ∫ g φ_i dx` for `g` given at the quadrature points.
pub fn assemble_load_quad(mesh: &Mesh, g: &QuadValues) -> Field {
    let dx = mesh.dx();
    let mut out = vec![0.0; mesh.n_nodes()];
    for (e, w) in g.0.iter().enumerate() {
        for a in 0..2 {
            out[e + a] += dx
                * (0..3)
                    .map(|q| GAUSS_WEIGHTS[q] * w[q] * SHAPE[q][a])
                    .sum::<f64>();
        }
    }
    Field::new(out)
}

/// `b_i = ∫ g(x) φ_i dx`.
pub fn assemble_load(mesh: &Mesh, g: impl Fn(f64) -> f64) -> Field {
    assemble_load_quad(mesh, &mesh.sample(g))
}

/// A mesh with its constant operators assembled once.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub mesh: Mesh,
    pub mass: BandedMatrix,
    pub stiffness: BandedMatrix,
}

impl Discretization {
    pub fn new(mesh: Mesh) -> Self {
        let mass = assemble_mass(&mesh);
        let stiffness = assemble_stiffness(&mesh);
        Discretization {
            mesh,
            mass,
            stiffness,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.mesh.n_nodes()
    }

    /// `1ᵀ M v`, the integral of the interpolant.
    pub fn integral(&self, v: &[f64]) -> f64 {
        self.mass.matvec(v).iter().sum()
    }

    /// `aᵀ M b`.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.mass.matvec(b).iter().zip(a).map(|(x, y)| x * y).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem1d::build_mesh;
    use approx::assert_abs_diff_eq;

    #[test]
    fn unit_element_mass() {
        let m = assemble_mass(&build_mesh(2.0, 3).unwrap());
        let diag = [1.0 / 3.0, 2.0 / 3.0, 1.0 / 3.0];
        for i in 0..3 {
            assert_abs_diff_eq!(m.get(i, i), diag[i], epsilon = 1e-15);
        }
        assert_abs_diff_eq!(m.get(0, 1), 1.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.get(1, 2), 1.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.row_sums().iter().sum::<f64>(), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn mass_total_is_length() {
        let m = assemble_mass(&build_mesh(5.0, 11).unwrap());
        let total: f64 = m.entries().map(|(_, _, v)| v).sum();
        assert_abs_diff_eq!(total, 5.0, epsilon = 1e-13);
    }

    #[test]
    fn unit_element_stiffness() {
        let k = assemble_stiffness(&build_mesh(2.0, 3).unwrap());
        assert_eq!((k.get(0, 0), k.get(1, 1), k.get(2, 2)), (1.0, 2.0, 1.0));
        assert_eq!((k.get(0, 1), k.get(1, 2)), (-1.0, -1.0));
        assert!(k.row_sums().iter().all(|&s| s == 0.0));
    }

    #[test]
    fn stiffness_on_linear_field() {
        let mesh = build_mesh(1.0, 5).unwrap();
        let k = assemble_stiffness(&mesh);
        let kx = k.matvec(&mesh.nodes());
        assert_abs_diff_eq!(kx[0], -1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(kx[4], 1.0, epsilon = 1e-13);
        for v in &kx[1..4] {
            assert_abs_diff_eq!(*v, 0.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn constant_weights_reduce_to_plain_operators() {
        let mesh = build_mesh(2.0, 3).unwrap();
        let one = Field::constant(3, 1.0);
        let three = Field::constant(3, 3.0);
        assert_eq!(assemble_weighted_mass(&mesh, &one), assemble_mass(&mesh));
        assert_eq!(
            assemble_weighted_stiffness(&mesh, &one),
            assemble_stiffness(&mesh)
        );
        let m3 = assemble_weighted_mass(&mesh, &three);
        let m = assemble_mass(&mesh);
        for (i, j, v) in m.entries() {
            assert_abs_diff_eq!(m3.get(i, j), 3.0 * v, epsilon = 1e-15);
        }
    }

    #[test]
    fn unweighted_convection_columns_sum_to_zero() {
        let mesh = build_mesh(3.0, 7).unwrap();
        let c = assemble_weighted_convection(&mesh, &Field::constant(7, 1.0));
        let col_sums = c.transpose().row_sums();
        assert!(col_sums.iter().all(|s| s.abs() < 1e-15));
        // C·1 = ∫ φ_i' dx = φ_i(L) - φ_i(0)
        let c1 = c.matvec(&[1.0; 7]);
        assert_abs_diff_eq!(c1[0], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c1[6], 1.0, epsilon = 1e-15);
        assert!(c1[1..6].iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn load_of_constant_matches_mass_row_sums() {
        let mesh = build_mesh(2.0, 3).unwrap();
        let b = assemble_load(&mesh, |_| 1.0);
        let m1 = assemble_mass(&mesh).row_sums();
        for (a, b) in b.iter().zip(&m1) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-15);
        }
        assert!(assemble_load(&mesh, |_| 0.0).iter().all(|&v| v == 0.0));
    }
}
