use nalgebra::{DMatrix, DVector};

use super::{check_pow_domain, domain, is_integer, BinOp, ExprError, Func, Node, MIN_DIVISOR};

/// Second-order jet of a scalar function: value, gradient and Hessian.
///
/// Hessians are assembled on the upper triangle and mirrored, so they are
/// exactly symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
}

impl Jet2 {
    pub fn constant(value: f64, dim: usize) -> Self {
        Self {
            value,
            gradient: DVector::zeros(dim),
            hessian: DMatrix::zeros(dim, dim),
        }
    }

    pub fn variable(value: f64, index: usize, dim: usize) -> Self {
        let mut jet = Self::constant(value, dim);
        jet.gradient[index] = 1.0;
        jet
    }

    pub fn dim(&self) -> usize {
        self.gradient.len()
    }

    /// `h = f(self)` given `f(u)`, `f'(u)`, `f''(u)`.
    pub fn chain(&self, f0: f64, f1: f64, f2: f64) -> Self {
        let n = self.dim();
        let g = &self.gradient;
        let mut hessian = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = f2 * g[i] * g[j] + f1 * self.hessian[(i, j)];
                hessian[(i, j)] = v;
                hessian[(j, i)] = v;
            }
        }
        Self {
            value: f0,
            gradient: g * f1,
            hessian,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            value: self.value + other.value,
            gradient: &self.gradient + &other.gradient,
            hessian: &self.hessian + &other.hessian,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            value: self.value - other.value,
            gradient: &self.gradient - &other.gradient,
            hessian: &self.hessian - &other.hessian,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.dim();
        let (u, v) = (self.value, other.value);
        let (gu, gv) = (&self.gradient, &other.gradient);
        let mut hessian = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let h = u * other.hessian[(i, j)]
                    + v * self.hessian[(i, j)]
                    + gu[i] * gv[j]
                    + gv[i] * gu[j];
                hessian[(i, j)] = h;
                hessian[(j, i)] = h;
            }
        }
        Self {
            value: u * v,
            gradient: gv * u + gu * v,
            hessian,
        }
    }
}

pub(super) fn eval(node: &Node, x: &[f64], coords: &[String]) -> Result<Jet2, ExprError> {
    let n = x.len();
    Ok(match node {
        Node::Const(c) => Jet2::constant(*c, n),
        Node::Coord(i) => Jet2::variable(x[*i], *i, n),
        Node::Unary(func, a) => {
            let u = eval(a, x, coords)?;
            let t = u.value;
            match func {
                Func::Neg => u.chain(-t, -1.0, 0.0),
                Func::Sin => u.chain(t.sin(), t.cos(), -t.sin()),
                Func::Cos => u.chain(t.cos(), -t.sin(), -t.cos()),
                Func::Exp => {
                    let e = t.exp();
                    u.chain(e, e, e)
                }
                Func::Tanh => {
                    let th = t.tanh();
                    let d = 1.0 - th * th;
                    u.chain(th, d, -2.0 * th * d)
                }
                Func::Log => {
                    if t <= 0.0 {
                        return Err(domain(node, coords, format!("log of non-positive value {t}")));
                    }
                    u.chain(t.ln(), 1.0 / t, -1.0 / (t * t))
                }
                Func::Sqrt => {
                    if t <= 0.0 {
                        return Err(domain(
                            node,
                            coords,
                            format!("sqrt needs a positive argument for derivatives, got {t}"),
                        ));
                    }
                    let s = t.sqrt();
                    u.chain(s, 0.5 / s, -0.25 / (s * t))
                }
            }
        }
        Node::Binary(op, a, b) => {
            let u = eval(a, x, coords)?;
            let v = eval(b, x, coords)?;
            match op {
                BinOp::Add => u.add(&v),
                BinOp::Sub => u.sub(&v),
                BinOp::Mul => u.mul(&v),
                BinOp::Div => {
                    let d = v.value;
                    if d.abs() < MIN_DIVISOR {
                        return Err(domain(node, coords, format!("division by {d:e}")));
                    }
                    let recip = v.chain(1.0 / d, -1.0 / (d * d), 2.0 / (d * d * d));
                    u.mul(&recip)
                }
            }
        }
        Node::Pow(a, c) => {
            let u = eval(a, x, coords)?;
            let t = u.value;
            let c = *c;
            check_pow_domain(node, coords, t, c, true)?;
            let p = |k: f64| {
                if is_integer(k) {
                    t.powi(k as i32)
                } else {
                    t.powf(k)
                }
            };
            let f0 = p(c);
            let f1 = if c == 0.0 { 0.0 } else { c * p(c - 1.0) };
            let f2 = if c == 0.0 || c == 1.0 {
                0.0
            } else {
                c * (c - 1.0) * p(c - 2.0)
            };
            u.chain(f0, f1, f2)
        }
    })
}
