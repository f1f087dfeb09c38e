use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ElementGeometry;
use crate::{Error, Result};

/// Linear tetrahedral mesh with one integration point per element.
#[derive(Debug, Clone, PartialEq)]
pub struct TetMesh {
    pub nodes: Vec<[f64; 3]>,
    pub elements: Vec<[usize; 4]>,
}

impl TetMesh {
    pub fn new(nodes: Vec<[f64; 3]>, elements: Vec<[usize; 4]>) -> Result<Self> {
        let n = nodes.len();
        for (e, tet) in elements.iter().enumerate() {
            if let Some(&bad) = tet.iter().find(|&&i| i >= n) {
                return Err(Error::InvalidStructure(format!(
                    "element {e} references node {bad}, mesh has {n} nodes"
                )));
            }
        }
        let mesh = Self { nodes, elements };
        mesh.geometry()?;
        Ok(mesh)
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn element_coords(&self, e: usize) -> [[f64; 3]; 4] {
        self.elements[e].map(|i| self.nodes[i])
    }

    /// Volumes and shape-function gradients; fails on a non-positive volume.
    pub fn geometry(&self) -> Result<Vec<ElementGeometry>> {
        (0..self.n_elements())
            .map(|e| ElementGeometry::new(e, &self.element_coords(e)))
            .collect()
    }

    /// Number of elements touching each node.
    pub fn node_valence(&self) -> Vec<usize> {
        let mut v = alloc::vec![0; self.n_nodes()];
        for tet in &self.elements {
            for &i in tet {
                v[i] += 1;
            }
        }
        v
    }
}

fn signed_volume(x: &[[f64; 3]; 4]) -> f64 {
    let a = sub(x[1], x[0]);
    let b = sub(x[2], x[0]);
    let c = sub(x[3], x[0]);
    (a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
        + a[2] * (b[0] * c[1] - b[1] * c[0]))
        / 6.0
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Unit cube split into `nx * ny * nz` hexahedra of six tetrahedra each.
///
/// Interior nodes are displaced by up to `jitter` grid spacings per axis
/// (`jitter < 0.25` keeps every element positive). Every element is
/// oriented with positive volume.
pub fn generate_tet_mesh(nx: usize, ny: usize, nz: usize, jitter: f64, seed: u64) -> Result<TetMesh> {
    if nx == 0 || ny == 0 || nz == 0 {
        return Err(Error::InvalidParameter(format!(
            "mesh needs positive dimensions, got {nx}x{ny}x{nz}"
        )));
    }
    if !(0.0..0.25).contains(&jitter) {
        return Err(Error::InvalidParameter(format!(
            "jitter must lie in [0, 0.25), got {jitter}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let id = |i: usize, j: usize, k: usize| (k * (ny + 1) + j) * (nx + 1) + i;
    let h = [1.0 / nx as f64, 1.0 / ny as f64, 1.0 / nz as f64];
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1));
    for k in 0..=nz {
        for j in 0..=ny {
            for i in 0..=nx {
                let idx = [i, j, k];
                let last = [nx, ny, nz];
                let mut p = [0.0; 3];
                for a in 0..3 {
                    p[a] = idx[a] as f64 * h[a];
                    if idx[a] > 0 && idx[a] < last[a] && jitter > 0.0 {
                        p[a] += rng.gen_range(-jitter..jitter) * h[a];
                    }
                }
                nodes.push(p);
            }
        }
    }
    // Kuhn split: one tetrahedron per monotone path from corner 000 to 111.
    const PATHS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut elements = Vec::with_capacity(6 * nx * ny * nz);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                for path in PATHS {
                    let mut c = [i, j, k];
                    let mut tet = [id(c[0], c[1], c[2]); 4];
                    for (s, &axis) in path.iter().enumerate() {
                        c[axis] += 1;
                        tet[s + 1] = id(c[0], c[1], c[2]);
                    }
                    if signed_volume(&tet.map(|n| nodes[n])) < 0.0 {
                        tet.swap(2, 3);
                    }
                    elements.push(tet);
                }
            }
        }
    }
    TetMesh::new(nodes, elements)
}

pub(crate) fn tet_volume(x: &[[f64; 3]; 4]) -> f64 {
    signed_volume(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn volumes_sum_to_one() {
        for jitter in [0.0, 0.2] {
            let m = generate_tet_mesh(3, 2, 4, jitter, 9).unwrap();
            assert_eq!(m.n_elements(), 6 * 24);
            let total: f64 = m.geometry().unwrap().iter().map(|g| g.volume).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic() {
        assert_eq!(
            generate_tet_mesh(2, 2, 2, 0.1, 4).unwrap(),
            generate_tet_mesh(2, 2, 2, 0.1, 4).unwrap()
        );
    }

    #[test]
    fn rejects_bad_input() {
        assert!(TetMesh::new(alloc::vec![[0.0; 3]; 3], alloc::vec![[0, 1, 2, 3]]).is_err());
        let flat = alloc::vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]];
        assert!(matches!(
            TetMesh::new(flat, alloc::vec![[0, 1, 2, 3]]),
            Err(Error::DegenerateElement { .. })
        ));
        assert!(generate_tet_mesh(1, 1, 1, 0.3, 0).is_err());
    }
}
