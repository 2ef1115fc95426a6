//! Small fixed-size linear algebra on R^4 and R^3.
//!
//! Points of C^2 are identified with R^4 by `(w1, w2) -> (Re w1, Im w1, Re w2, Im w2)`,
//! so `e1, e2` span the `w1` line and `e3, e4` span the `w2` line.

use num_complex::Complex64;

pub type Vec4 = [f64; 4];
pub type Vec3 = [f64; 3];

pub fn from_pair(w1: Complex64, w2: Complex64) -> Vec4 {
    [w1.re, w1.im, w2.re, w2.im]
}

pub fn dot4(a: &Vec4, b: &Vec4) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

pub fn norm4(a: &Vec4) -> f64 {
    dot4(a, a).sqrt()
}

pub fn add4(a: &Vec4, b: &Vec4) -> Vec4 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
}

pub fn sub4(a: &Vec4, b: &Vec4) -> Vec4 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]]
}

pub fn scale4(a: &Vec4, s: f64) -> Vec4 {
    [a[0] * s, a[1] * s, a[2] * s, a[3] * s]
}

/// Standard complex structure: `J0 e1 = e2`, `J0 e3 = e4`.
pub fn j0(a: &Vec4) -> Vec4 {
    [-a[1], a[0], -a[3], a[2]]
}

pub fn unit(i: usize) -> Vec4 {
    let mut v = [0.0; 4];
    v[i] = 1.0;
    v
}

pub fn det4(m: &[Vec4; 4]) -> f64 {
    // Laplace expansion along the first column vector's entries, using 2x2 minors.
    let [a, b, c, d] = m;
    let s0 = a[0] * b[1] - a[1] * b[0];
    let s1 = a[0] * b[2] - a[2] * b[0];
    let s2 = a[0] * b[3] - a[3] * b[0];
    let s3 = a[1] * b[2] - a[2] * b[1];
    let s4 = a[1] * b[3] - a[3] * b[1];
    let s5 = a[2] * b[3] - a[3] * b[2];
    let c5 = c[2] * d[3] - c[3] * d[2];
    let c4 = c[1] * d[3] - c[3] * d[1];
    let c3 = c[1] * d[2] - c[2] * d[1];
    let c2 = c[0] * d[3] - c[3] * d[0];
    let c1 = c[0] * d[2] - c[2] * d[0];
    let c0 = c[0] * d[1] - c[1] * d[0];
    s0 * c5 - s1 * c4 + s2 * c3 + s3 * c2 - s4 * c1 + s5 * c0
}

pub fn dot3(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn sub3(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn cross3(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn norm3(a: &Vec3) -> f64 {
    dot3(a, a).sqrt()
}

/// Row-major 4x4 matrix acting on column vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat4(pub [[f64; 4]; 4]);

impl Mat4 {
    pub fn identity() -> Self {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Mat4(m)
    }

    /// Rotation by `angle` in the oriented coordinate plane `(i, j)` (0-based):
    /// `e_i -> cos e_i + sin e_j`.
    pub fn givens(i: usize, j: usize, angle: f64) -> Self {
        let mut m = Self::identity();
        let (s, c) = angle.sin_cos();
        m.0[i][i] = c;
        m.0[j][j] = c;
        m.0[j][i] = s;
        m.0[i][j] = -s;
        m
    }

    pub fn apply(&self, v: &Vec4) -> Vec4 {
        let mut out = [0.0; 4];
        for (i, row) in self.0.iter().enumerate() {
            out[i] = dot4(row, v);
        }
        out
    }

    pub fn mul(&self, rhs: &Mat4) -> Mat4 {
        let mut out = [[0.0; 4]; 4];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = (0..4).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        Mat4(out)
    }

    pub fn transpose(&self) -> Mat4 {
        let mut out = [[0.0; 4]; 4];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = self.0[j][i];
            }
        }
        Mat4(out)
    }

    pub fn column(&self, j: usize) -> Vec4 {
        [self.0[0][j], self.0[1][j], self.0[2][j], self.0[3][j]]
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    pub fn det(&self) -> f64 {
        det4(&[self.column(0), self.column(1), self.column(2), self.column(3)])
    }
}

/// Stereographic chart of the sphere of radius `radius` from `pole`.
///
/// `frame` is an orthonormal basis `(u1, u2, u3)` of `pole^perp` chosen so that
/// `(u1, u2, u3, pole/|pole|)` is a positive basis of R^4; with the outward normal
/// convention on the sphere the chart is then orientation preserving.
#[derive(Debug, Clone, Copy)]
pub struct Stereographic {
    pub pole: Vec4,
    pub frame: [Vec4; 3],
    pub radius: f64,
}

impl Stereographic {
    pub fn new(pole_dir: Vec4, frame: [Vec4; 3], radius: f64) -> Self {
        let n = norm4(&pole_dir);
        Stereographic { pole: scale4(&pole_dir, 1.0 / n), frame, radius }
    }

    /// Chart from `pole_dir`, completing it to a positive orthonormal frame.
    pub fn from_pole(pole_dir: Vec4, radius: f64) -> Self {
        let p = scale4(&pole_dir, 1.0 / norm4(&pole_dir));
        let mut basis: Vec<Vec4> = Vec::with_capacity(3);
        for i in 0..4 {
            let mut v = unit(i);
            v = sub4(&v, &scale4(&p, dot4(&v, &p)));
            for b in &basis {
                v = sub4(&v, &scale4(b, dot4(&v, b)));
            }
            let n = norm4(&v);
            if n > 1e-6 {
                basis.push(scale4(&v, 1.0 / n));
            }
            if basis.len() == 3 {
                break;
            }
        }
        let mut frame = [basis[0], basis[1], basis[2]];
        if det4(&[frame[0], frame[1], frame[2], p]) < 0.0 {
            frame[2] = scale4(&frame[2], -1.0);
        }
        Stereographic { pole: p, frame, radius }
    }

    /// Image of a point `q` with `|q| = radius`, in units of `radius`.
    pub fn project(&self, q: &Vec4) -> Vec3 {
        let s = 1.0 / self.radius;
        let denom = 1.0 - dot4(q, &self.pole) * s;
        [dot4(q, &self.frame[0]) * s / denom, dot4(q, &self.frame[1]) * s / denom, dot4(q, &self.frame[2]) * s / denom]
    }

    /// Pushforward of a tangent vector `v` at `q`.
    pub fn push_tangent(&self, q: &Vec4, v: &Vec4) -> Vec3 {
        let s = 1.0 / self.radius;
        let denom = 1.0 - dot4(q, &self.pole) * s;
        let ddenom = -dot4(v, &self.pole) * s;
        let mut out = [0.0; 3];
        for (o, u) in out.iter_mut().zip(&self.frame) {
            let num = dot4(q, u) * s;
            let dnum = dot4(v, u) * s;
            *o = (dnum * denom - num * ddenom) / (denom * denom);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det4_of_identity_and_swap() {
        let id = [unit(0), unit(1), unit(2), unit(3)];
        assert_eq!(det4(&id), 1.0);
        let sw = [unit(1), unit(0), unit(2), unit(3)];
        assert_eq!(det4(&sw), -1.0);
        let cyc = [unit(3), unit(0), unit(1), unit(2)];
        assert_eq!(det4(&cyc), -1.0);
    }

    #[test]
    fn det4_matches_permutation_expansion() {
        let m = [[1.0, 2.0, -1.0, 0.5], [0.3, -2.0, 4.0, 1.0], [2.0, 0.0, 1.0, -3.0], [-1.0, 1.5, 0.25, 2.0]];
        // Leibniz formula over all 24 permutations.
        let mut perms = Vec::new();
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        let p = [a, b, c, d];
                        let mut seen = [false; 4];
                        if p.iter().all(|&x| !std::mem::replace(&mut seen[x], true)) {
                            perms.push(p);
                        }
                    }
                }
            }
        }
        let mut expect = 0.0;
        for p in perms {
            let mut inv = 0;
            for i in 0..4 {
                for j in i + 1..4 {
                    if p[i] > p[j] {
                        inv += 1;
                    }
                }
            }
            let sign = if inv % 2 == 0 { 1.0 } else { -1.0 };
            expect += sign * (0..4).map(|i| m[i][p[i]]).product::<f64>();
        }
        assert!((det4(&m) - expect).abs() < 1e-12);
    }

    #[test]
    fn givens_rotates_e_i_towards_e_j() {
        let r = Mat4::givens(0, 2, std::f64::consts::FRAC_PI_2);
        let v = r.apply(&unit(0));
        assert!((v[2] - 1.0).abs() < 1e-15 && v[0].abs() < 1e-15);
        assert!((r.det() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn stereographic_frame_is_positive() {
        for pole in [unit(3), [1.0, 1.0, 0.0, 0.0], [0.3, -0.2, 0.9, 0.1]] {
            let st = Stereographic::from_pole(pole, 1.0);
            let d = det4(&[st.frame[0], st.frame[1], st.frame[2], st.pole]);
            assert!((d - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn push_tangent_matches_finite_difference() {
        let st = Stereographic::from_pole([0.2, 0.1, -0.3, 0.9], 2.0);
        let curve = |t: f64| -> Vec4 {
            let v = [t.cos(), t.sin(), (2.0 * t).cos(), (2.0 * t).sin()];
            scale4(&v, 2.0 / 2f64.sqrt())
        };
        let t = 0.7;
        let h = 1e-6;
        let dq = scale4(&sub4(&curve(t + h), &curve(t - h)), 0.5 / h);
        let a = st.push_tangent(&curve(t), &dq);
        let b = scale3(&sub3(&st.project(&curve(t + h)), &st.project(&curve(t - h))), 0.5 / h);
        assert!(norm3(&sub3(&a, &b)) < 1e-6);
    }

    fn scale3(a: &Vec3, s: f64) -> Vec3 {
        [a[0] * s, a[1] * s, a[2] * s]
    }
}
