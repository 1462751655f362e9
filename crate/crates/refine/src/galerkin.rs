use std::f64::consts::PI;

use carousel_cc::reduced_basis;
use carousel_core::{Alpha, Complex64};
use carousel_plan::{CarouselFamily, CarouselPlan};
use nalgebra::{DMatrix, DVector};

use crate::{full_dim, FourierPath, RefineError, Result};

/// A body as seen in the frame of the base configuration: `X = u_0j` or
/// `X = u_0j + r_j e^(p_j s J) u_jk`.
#[derive(Clone, Debug)]
struct Body {
    mass: f64,
    center: usize,
    /// Offset of `u_jk`, the cluster radius and `p_j`.
    member: Option<(usize, f64, f64)>,
}

/// Coordinate block (`u_0` or one cluster): kinetic weight `w m`, time
/// factor `kappa`, residual scale.
#[derive(Clone, Debug)]
struct Block {
    red: std::ops::Range<usize>,
    kappa: f64,
    scale: f64,
    p: f64,
}

/// Discretization of the action on a fixed truncation.
#[derive(Clone, Debug)]
pub(crate) struct Galerkin {
    pub l: usize,
    pub nodes: usize,
    pub d_full: usize,
    pub d: usize,
    alpha: Alpha,
    bodies: Vec<Body>,
    blocks: Vec<Block>,
    /// Orthonormal basis of the center-of-mass constraints, block diagonal.
    pub b: DMatrix<f64>,
    /// Kinetic weight `w m` and time factor per full coordinate.
    wm: Vec<f64>,
    kap: Vec<f64>,
    /// `B^T diag(w m) B` and `B^T diag(w m) J B`.
    mw: DMatrix<f64>,
    mwj: DMatrix<f64>,
    /// `B^T J B`, the rotation generator in reduced coordinates.
    pub jr: DMatrix<f64>,
    /// Rotation generator of cluster 1 only.
    pub jr1: DMatrix<f64>,
}

fn apply_j_full(v: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(v.nrows(), v.ncols());
    for c in 0..v.ncols() {
        for i in (0..v.nrows()).step_by(2) {
            out[(i, c)] = -v[(i + 1, c)];
            out[(i + 1, c)] = v[(i, c)];
        }
    }
    out
}

impl Galerkin {
    pub fn new(family: &CarouselFamily, plan: &CarouselPlan, l: usize) -> Result<Galerkin> {
        if plan.n0() != family.n0() {
            return Err(RefineError::Invalid("plan and family disagree on the number of clusters".into()));
        }
        if l == 0 {
            return Err(RefineError::Invalid("truncation must be positive".into()));
        }
        let alpha = family.alpha();
        let n = family.n();
        let d_full = full_dim(&family.index);
        let d = d_full - 2 * (1 + family.n0());
        let nu = plan.nu;

        let mut b = DMatrix::zeros(d_full, d);
        let mut wm = vec![0.0; d_full];
        let mut kap = vec![nu; d_full];
        let mut blocks = Vec::new();
        let b0 = reduced_basis(&family.a0.masses);
        b.view_mut((0, 0), (2 * n, 2 * n - 2)).copy_from(&b0);
        for j in 0..n {
            wm[2 * j] = family.a0.masses[j];
            wm[2 * j + 1] = family.a0.masses[j];
        }
        blocks.push(Block { red: 0..2 * n - 2, kappa: nu, scale: nu.powi(-2), p: 0.0 });

        let mut bodies = Vec::new();
        let (mut off, mut roff) = (2 * n, 2 * n - 2);
        for j in 0..n {
            match family.clusters.get(j) {
                Some(cl) => {
                    let k = cl.len();
                    let r = plan.radii[j];
                    let w = r.powf(1.0 - alpha.value());
                    let bj = reduced_basis(&cl.masses);
                    b.view_mut((off, roff), (2 * k, 2 * k - 2)).copy_from(&bj);
                    for (i, m) in cl.masses.iter().enumerate() {
                        wm[off + 2 * i] = w * m;
                        wm[off + 2 * i + 1] = w * m;
                        kap[off + 2 * i] = nu / plan.omega[j];
                        kap[off + 2 * i + 1] = nu / plan.omega[j];
                        bodies.push(Body { mass: *m, center: 2 * j, member: Some((off + 2 * i, r, plan.p_list[j] as f64)) });
                    }
                    blocks.push(Block {
                        red: roff..roff + 2 * k - 2,
                        kappa: nu / plan.omega[j],
                        scale: r.powf(alpha.value() - 1.0),
                        p: plan.p_list[j] as f64,
                    });
                    off += 2 * k;
                    roff += 2 * k - 2;
                }
                None => bodies.push(Body { mass: family.a0.masses[j], center: 2 * j, member: None }),
            }
        }
        let wmb = DMatrix::from_fn(d_full, d, |i, c| wm[i] * b[(i, c)]);
        let mw = b.transpose() * &wmb;
        let mwj = b.transpose() * apply_j_full(&wmb);
        let jr = b.transpose() * apply_j_full(&b);
        let mut jr1 = DMatrix::zeros(d, d);
        if let Some(blk) = blocks.get(1) {
            let r = blk.red.clone();
            jr1.view_mut((r.start, r.start), (r.len(), r.len())).copy_from(&jr.view((r.start, r.start), (r.len(), r.len())));
        }
        Ok(Galerkin { l, nodes: 4 * l + 1, d_full, d, alpha, bodies, blocks, b, wm, kap, mw, mwj, jr, jr1 })
    }

    pub fn modes(&self) -> usize {
        2 * self.l + 1
    }

    pub fn len(&self) -> usize {
        self.modes() * self.d
    }

    pub fn node(&self, i: usize) -> f64 {
        2.0 * PI * i as f64 / self.nodes as f64
    }

    fn block_of(&self, i: usize) -> &Block {
        self.blocks.iter().find(|b| b.red.contains(&i)).expect("reduced coordinate belongs to a block")
    }

    /// Reduced real coefficients: constant, then `(cos l, sin l)` pairs.
    pub fn to_x(&self, path: &FourierPath) -> DVector<f64> {
        let p = path.with_truncation(self.l);
        let bt = self.b.transpose();
        let mut x = DVector::zeros(self.len());
        let re = |v: &[Complex64]| DVector::from_iterator(v.len(), v.iter().map(|c| c.re));
        let im = |v: &[Complex64]| DVector::from_iterator(v.len(), v.iter().map(|c| c.im));
        x.rows_mut(0, self.d).copy_from(&(&bt * re(&p.coeffs[0])));
        for l in 1..=self.l {
            // c_l = (a - i b) / 2
            let a = &bt * re(&p.coeffs[l]) * 2.0;
            let bb = &bt * im(&p.coeffs[l]) * -2.0;
            x.rows_mut((2 * l - 1) * self.d, self.d).copy_from(&a);
            x.rows_mut(2 * l * self.d, self.d).copy_from(&bb);
        }
        x
    }

    /// Full-coordinate path from reduced coefficients.
    pub fn from_x(&self, x: &DVector<f64>, index: &carousel_core::ClusterIndex) -> FourierPath {
        let mut path = FourierPath::zeros(index.clone(), self.l);
        let c0 = &self.b * x.rows(0, self.d);
        for i in 0..self.d_full {
            path.coeffs[0][i] = c0[i].into();
        }
        for l in 1..=self.l {
            let a = &self.b * x.rows((2 * l - 1) * self.d, self.d);
            let bb = &self.b * x.rows(2 * l * self.d, self.d);
            for i in 0..self.d_full {
                path.coeffs[l][i] = Complex64::new(0.5 * a[i], -0.5 * bb[i]);
            }
        }
        path
    }

    /// Basis function `m` (constant, `cos l`, `sin l`) at `s`.
    fn basis(m: usize, s: f64) -> f64 {
        if m == 0 {
            1.0
        } else {
            let l = m.div_ceil(2) as f64;
            if m % 2 == 1 {
                (l * s).cos()
            } else {
                (l * s).sin()
            }
        }
    }

    /// Reduced `u(s)` and `u'(s)` at every node.
    fn node_values(&self, x: &DVector<f64>) -> Vec<(DVector<f64>, DVector<f64>)> {
        (0..self.nodes)
            .map(|i| {
                let s = self.node(i);
                let mut w = x.rows(0, self.d).clone_owned();
                let mut dw = DVector::zeros(self.d);
                for l in 1..=self.l {
                    let lf = l as f64;
                    let (sn, cs) = (lf * s).sin_cos();
                    let a = x.rows((2 * l - 1) * self.d, self.d);
                    let b = x.rows(2 * l * self.d, self.d);
                    w += a * cs + b * sn;
                    dw += (b * cs - a * sn) * lf;
                }
                (w, dw)
            })
            .collect()
    }

    /// Potential `U(X(u, s))`, its gradient in full coordinates and,
    /// optionally, its Hessian.
    fn potential(&self, u: &DVector<f64>, s: f64, hess: bool) -> Result<(f64, DVector<f64>, Option<DMatrix<f64>>)> {
        let nb = self.bodies.len();
        let alpha = self.alpha;
        // positions and the linear maps X_b = sum T u
        let mut x = vec![[0.0; 2]; nb];
        let mut rot = vec![(1.0, 0.0, 0.0); nb];
        for (i, b) in self.bodies.iter().enumerate() {
            x[i] = [u[b.center], u[b.center + 1]];
            if let Some((off, r, p)) = b.member {
                let (sn, cs) = (p * s).sin_cos();
                let (vx, vy) = (u[off], u[off + 1]);
                x[i][0] += r * (cs * vx - sn * vy);
                x[i][1] += r * (sn * vx + cs * vy);
                rot[i] = (r, cs, sn);
            }
        }
        let mut value = 0.0;
        let mut gx = vec![[0.0; 2]; nb];
        let mut hx = if hess { vec![[[0.0; 2]; 2]; nb * nb] } else { Vec::new() };
        for i in 0..nb {
            for j in i + 1..nb {
                let d = [x[i][0] - x[j][0], x[i][1] - x[j][1]];
                let r2 = d[0] * d[0] + d[1] * d[1];
                if !(r2 > 0.0) || !r2.is_finite() {
                    return Err(RefineError::Collision { i, j, s });
                }
                let mm = self.bodies[i].mass * self.bodies[j].mass;
                let w = alpha.pair_weight(r2);
                value += mm * alpha.phi(r2.sqrt());
                let g = [-mm * w * d[0], -mm * w * d[1]];
                gx[i][0] += g[0];
                gx[i][1] += g[1];
                gx[j][0] -= g[0];
                gx[j][1] -= g[1];
                if hess {
                    let c = (alpha.value() + 1.0) * w / r2;
                    let h = [
                        [mm * (-w + c * d[0] * d[0]), mm * c * d[0] * d[1]],
                        [mm * c * d[0] * d[1], mm * (-w + c * d[1] * d[1])],
                    ];
                    for (a, bb, sg) in [(i, i, 1.0), (j, j, 1.0), (i, j, -1.0), (j, i, -1.0)] {
                        let t = &mut hx[a * nb + bb];
                        for r in 0..2 {
                            for c in 0..2 {
                                t[r][c] += sg * h[r][c];
                            }
                        }
                    }
                }
            }
        }
        // pull back through X = u_0j + r R u_jk
        let maps = |i: usize| -> Vec<(usize, [[f64; 2]; 2])> {
            let b = &self.bodies[i];
            let mut m = vec![(b.center, [[1.0, 0.0], [0.0, 1.0]])];
            if let Some((off, _, _)) = b.member {
                let (r, cs, sn) = rot[i];
                m.push((off, [[r * cs, -r * sn], [r * sn, r * cs]]));
            }
            m
        };
        let mut g = DVector::zeros(self.d_full);
        for i in 0..nb {
            for (off, t) in maps(i) {
                // T^T g
                g[off] += t[0][0] * gx[i][0] + t[1][0] * gx[i][1];
                g[off + 1] += t[0][1] * gx[i][0] + t[1][1] * gx[i][1];
            }
        }
        let h = if hess {
            let mut h = DMatrix::zeros(self.d_full, self.d_full);
            let all: Vec<_> = (0..nb).map(maps).collect();
            for i in 0..nb {
                for j in 0..nb {
                    let hij = hx[i * nb + j];
                    if hij == [[0.0; 2]; 2] {
                        continue;
                    }
                    for (oi, ti) in &all[i] {
                        for (oj, tj) in &all[j] {
                            // ti^T hij tj
                            for r in 0..2 {
                                for c in 0..2 {
                                    let mut acc = 0.0;
                                    for a in 0..2 {
                                        for bb in 0..2 {
                                            acc += ti[a][r] * hij[a][bb] * tj[bb][c];
                                        }
                                    }
                                    h[(oi + r, oj + c)] += acc;
                                }
                            }
                        }
                    }
                }
            }
            Some(h)
        } else {
            None
        };
        Ok((value, g, h))
    }

    /// Kinetic part of `dA/dx` on mode `m`.
    fn kinetic_grad(&self, x: &DVector<f64>, out: &mut DVector<f64>) {
        let d = self.d;
        out.rows_mut(0, d).copy_from(&(&self.mw * x.rows(0, d) * (2.0 * PI)));
        for l in 1..=self.l {
            let lf = l as f64;
            let a = x.rows((2 * l - 1) * d, d).clone_owned();
            let b = x.rows(2 * l * d, d).clone_owned();
            let (ma, mb) = (&self.mw * &a, &self.mw * &b);
            let (ja, jb) = (&self.mwj * &a, &self.mwj * &b);
            for i in 0..d {
                let k = self.block_of(i).kappa;
                let f = 1.0 + k * k * lf * lf;
                out[(2 * l - 1) * d + i] = PI * (f * ma[i] - 2.0 * k * lf * jb[i]);
                out[2 * l * d + i] = PI * (f * mb[i] + 2.0 * k * lf * ja[i]);
            }
        }
    }

    /// Discrete action `(2 pi / N) sum_i [K + U](s_i)`.
    pub fn action(&self, x: &DVector<f64>) -> Result<f64> {
        let vals = self.node_values(x);
        let mut total = 0.0;
        for (i, (w, dw)) in vals.iter().enumerate() {
            let s = self.node(i);
            let u = &self.b * w;
            let du = &self.b * dw;
            let (v, _, _) = self.potential(&u, s, false)?;
            total += v + self.kinetic_density(&u, &du);
        }
        Ok(2.0 * PI * total / self.nodes as f64)
    }

    /// `1/2 sum w m |kappa u' + J u|^2` in full coordinates.
    fn kinetic_density(&self, u: &DVector<f64>, du: &DVector<f64>) -> f64 {
        let mut k = 0.0;
        for i in (0..self.d_full).step_by(2) {
            let vx = self.kap[i] * du[i] - u[i + 1];
            let vy = self.kap[i] * du[i + 1] + u[i];
            k += 0.5 * self.wm[i] * (vx * vx + vy * vy);
        }
        k
    }

    /// `dA/dx` (exact derivative of the discrete action).
    pub fn action_derivative(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let mut out = DVector::zeros(self.len());
        self.kinetic_grad(x, &mut out);
        let bt = self.b.transpose();
        let vals = self.node_values(x);
        let w = 2.0 * PI / self.nodes as f64;
        for (i, (wv, _)) in vals.iter().enumerate() {
            let s = self.node(i);
            let (_, g, _) = self.potential(&(&self.b * wv), s, false)?;
            let gr = &bt * g * w;
            for m in 0..self.modes() {
                let f = Self::basis(m, s);
                let mut r = out.rows_mut(m * self.d, self.d);
                r.axpy(f, &gr, 1.0);
            }
        }
        Ok(out)
    }

    /// Row scaling taking `dA/dx` to the projected, preconditioned
    /// residual: `1/(2 pi)` or `1/pi` per mode, the block scale and
    /// `(1 + l^2)^-1`.
    pub fn row_scale(&self) -> DVector<f64> {
        DVector::from_fn(self.len(), |k, _| {
            let (m, i) = (k / self.d, k % self.d);
            let l = m.div_ceil(2) as f64;
            let quad = if m == 0 { 1.0 / (2.0 * PI) } else { 1.0 / PI };
            quad * self.block_of(i).scale / (1.0 + l * l)
        })
    }

    pub fn residual(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.action_derivative(x)?.component_mul(&self.row_scale()))
    }

    /// Hessian of the discrete action.
    pub fn action_hessian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        let (d, l) = (self.d, self.l);
        let n = self.len();
        let mut h = DMatrix::zeros(n, n);
        // kinetic part, block diagonal in l
        h.view_mut((0, 0), (d, d)).copy_from(&(&self.mw * (2.0 * PI)));
        for ll in 1..=l {
            let lf = ll as f64;
            let (ia, ib) = ((2 * ll - 1) * d, 2 * ll * d);
            for i in 0..d {
                let k = self.block_of(i).kappa;
                let f = 1.0 + k * k * lf * lf;
                for j in 0..d {
                    h[(ia + i, ia + j)] = PI * f * self.mw[(i, j)];
                    h[(ib + i, ib + j)] = PI * f * self.mw[(i, j)];
                    h[(ia + i, ib + j)] = -PI * 2.0 * k * lf * self.mwj[(i, j)];
                    h[(ib + i, ia + j)] = PI * 2.0 * k * lf * self.mwj[(i, j)];
                }
            }
        }
        // potential part through the cosine and sine transforms of the
        // node Hessians; products of two modes stay below the node count
        let bt = self.b.transpose();
        let mut hc = vec![DMatrix::<f64>::zeros(d, d); 2 * l + 1];
        let mut hs = vec![DMatrix::<f64>::zeros(d, d); 2 * l + 1];
        let w = 2.0 * PI / self.nodes as f64;
        for (i, (wv, _)) in self.node_values(x).iter().enumerate() {
            let s = self.node(i);
            let (_, _, hf) = self.potential(&(&self.b * wv), s, true)?;
            let hr = &bt * hf.unwrap() * &self.b * w;
            for m in 0..=2 * l {
                let (sn, cs) = (m as f64 * s).sin_cos();
                hc[m] += &hr * cs;
                hs[m] += &hr * sn;
            }
        }
        let c = |m: i64| &hc[m.unsigned_abs() as usize];
        let s = |m: i64| -> DMatrix<f64> {
            if m >= 0 {
                hs[m as usize].clone()
            } else {
                -&hs[(-m) as usize]
            }
        };
        // basis m -> (l, is_sin)
        let kind = |m: usize| -> (i64, bool) { (m.div_ceil(2) as i64, m > 0 && m % 2 == 0) };
        for m1 in 0..self.modes() {
            for m2 in 0..self.modes() {
                let ((l1, s1), (l2, s2)) = (kind(m1), kind(m2));
                let blk = match (s1, s2) {
                    (false, false) if l1 == 0 || l2 == 0 => {
                        if l1 == 0 && l2 == 0 {
                            c(0).clone()
                        } else {
                            c(l1 + l2).clone()
                        }
                    }
                    (false, false) => (c(l1 - l2) + c(l1 + l2)) * 0.5,
                    (true, true) => (c(l1 - l2) - c(l1 + l2)) * 0.5,
                    (false, true) if l1 == 0 => s(l2),
                    (false, true) => (s(l1 + l2) + s(l2 - l1)) * 0.5,
                    (true, false) if l2 == 0 => s(l1),
                    (true, false) => (s(l1 + l2) + s(l1 - l2)) * 0.5,
                };
                let mut v = h.view_mut((m1 * d, m2 * d), (d, d));
                v += blk;
            }
        }
        Ok(h)
    }

    pub fn jacobian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        let mut h = self.action_hessian(x)?;
        let sc = self.row_scale();
        for (i, mut row) in h.row_iter_mut().enumerate() {
            row *= sc[i];
        }
        Ok(h)
    }

    /// `J x` applied mode by mode: the generator of the rotation action.
    pub fn rotation_generator(&self, x: &DVector<f64>, jr: &DMatrix<f64>) -> DVector<f64> {
        let mut g = DVector::zeros(self.len());
        for m in 0..self.modes() {
            g.rows_mut(m * self.d, self.d).copy_from(&(jr * x.rows(m * self.d, self.d)));
        }
        g
    }

    /// Generator of the time shift `u_j(s) -> e^(p_j c J) u_j(s + c)`.
    pub fn shift_generator(&self, x: &DVector<f64>) -> DVector<f64> {
        let d = self.d;
        let mut g = DVector::zeros(self.len());
        for l in 1..=self.l {
            let lf = l as f64;
            let (ia, ib) = ((2 * l - 1) * d, 2 * l * d);
            for i in 0..d {
                g[ia + i] = lf * x[ib + i];
                g[ib + i] = -lf * x[ia + i];
            }
        }
        let mut pj = DMatrix::zeros(d, d);
        for blk in self.blocks.iter().skip(1) {
            let r = blk.red.clone();
            let v = self.jr.view((r.start, r.start), (r.len(), r.len())) * blk.p;
            pj.view_mut((r.start, r.start), (r.len(), r.len())).copy_from(&v);
        }
        g + self.rotation_generator(x, &pj)
    }

    pub fn tail(&self, x: &DVector<f64>) -> f64 {
        let d = self.d;
        let a = x.rows((2 * self.l - 1) * d, d).norm();
        let b = x.rows(2 * self.l * d, d).norm();
        0.5 * (a * a + b * b).sqrt()
    }
}

/// Projected, preconditioned gradient of the discrete action, mapped back
/// to full coordinates: per mode `B (1 + l^2)^-1 D B^T dA/du`, with `D`
/// equal to `nu^-2` on the centers and `r_j^(alpha-1)` on cluster `j`.
pub fn action_gradient(path: &FourierPath, plan: &CarouselPlan, family: &CarouselFamily) -> Result<FourierPath> {
    let g = Galerkin::new(family, plan, path.l)?;
    let r = g.residual(&g.to_x(path))?;
    Ok(g.from_x(&r, &path.index))
}

/// Discrete action `int_0^(2 pi) (K + U) ds` on `4L + 1` nodes.
pub fn discrete_action(path: &FourierPath, plan: &CarouselPlan, family: &CarouselFamily) -> Result<f64> {
    let g = Galerkin::new(family, plan, path.l)?;
    g.action(&g.to_x(path))
}

/// Euclidean norm of the reduced residual vector.
pub fn projected_gradient_norm(path: &FourierPath, plan: &CarouselPlan, family: &CarouselFamily) -> Result<f64> {
    let g = Galerkin::new(family, plan, path.l)?;
    Ok(g.residual(&g.to_x(path))?.norm())
}
