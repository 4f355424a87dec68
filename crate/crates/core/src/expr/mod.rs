//! Closed-form scalar expressions over chart coordinates.
//!
//! An [`Expression`] is an immutable tree built by [`Expression::parse`]. It can be
//! evaluated to a plain value or to a [`Jet2`] carrying the exact gradient and
//! Hessian, obtained by propagating second-order forward-mode derivatives
//! through every node.

mod jet;
mod parse;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use jet::Jet2;

/// Divisors with magnitude below this are rejected instead of producing infinities.
pub const MIN_DIVISOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("syntax error at column {column}: {message}")]
    Syntax { column: usize, message: String },
    #[error("unknown identifier `{name}` at column {column}")]
    UnknownIdentifier { name: String, column: usize },
    #[error("function `{name}` at column {column} takes {expected} argument(s), found {found}")]
    Arity {
        name: String,
        column: usize,
        expected: usize,
        found: usize,
    },
    #[error("empty expression")]
    Empty,
    #[error("domain error in `{subexpression}`: {reason}")]
    Domain { subexpression: String, reason: String },
    #[error("expected a point with {expected} coordinates, found {found}")]
    Dimension { expected: usize, found: usize },
}

/// Unary functions. `Neg` doubles as the prefix minus operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Neg,
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Tanh,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Neg => "neg",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Tanh => "tanh",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "neg" => Func::Neg,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "tanh" => Func::Tanh,
            _ => return None,
        })
    }

    pub const ALL: [Func; 7] = [
        Func::Neg,
        Func::Sin,
        Func::Cos,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Tanh,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

/// Expression tree node. Powers only ever carry a constant exponent.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Coord(usize),
    Unary(Func, Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Pow(Box<Node>, f64),
}

impl Node {
    /// Largest coordinate index referenced, if any.
    pub fn max_coord(&self) -> Option<usize> {
        match self {
            Node::Const(_) => None,
            Node::Coord(i) => Some(*i),
            Node::Unary(_, a) | Node::Pow(a, _) => a.max_coord(),
            Node::Binary(_, a, b) => match (a.max_coord(), b.max_coord()) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            },
        }
    }

    pub fn is_constant(&self) -> bool {
        self.max_coord().is_none()
    }
}

/// A parsed expression bound to the coordinate names of its chart.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    root: Node,
    coords: Arc<[String]>,
}

impl Expression {
    /// Parses `text` over the coordinate names `coords`.
    ///
    /// Grammar: `+ -` bind loosest, then `* /`, then prefix minus, then `^`
    /// (right associative, exponent must reduce to a constant). Functions
    /// use call syntax, `pi` and `e` are named constants unless shadowed by a
    /// coordinate name.
    pub fn parse<S: AsRef<str>>(text: &str, coords: &[S]) -> Result<Self, ExprError> {
        let coords: Arc<[String]> = coords.iter().map(|c| c.as_ref().to_string()).collect();
        Self::parse_shared(text, coords)
    }

    /// Same as [`Expression::parse`] but reuses an existing coordinate list.
    pub fn parse_shared(text: &str, coords: Arc<[String]>) -> Result<Self, ExprError> {
        let root = parse::parse(text, &coords)?;
        Ok(Self { root, coords })
    }

    /// Wraps an existing tree. Panics if the tree references a coordinate outside `coords`.
    pub fn from_node(root: Node, coords: Arc<[String]>) -> Self {
        if let Some(i) = root.max_coord() {
            assert!(i < coords.len(), "coordinate index {i} out of range");
        }
        Self { root, coords }
    }

    pub fn constant(value: f64, coords: Arc<[String]>) -> Self {
        Self {
            root: Node::Const(value),
            coords,
        }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn coords(&self) -> &Arc<[String]> {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn is_constant(&self) -> bool {
        self.root.is_constant()
    }

    /// Constant value, if the expression references no coordinate and evaluates cleanly.
    pub fn constant_value(&self) -> Option<f64> {
        if self.is_constant() {
            eval_node(&self.root, &[], &self.coords).ok()
        } else {
            None
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64, ExprError> {
        self.check_dim(x.len())?;
        eval_node(&self.root, x, &self.coords)
    }

    /// Value, gradient and Hessian at `x`, exact up to rounding.
    pub fn eval_jet2(&self, x: &[f64]) -> Result<Jet2, ExprError> {
        self.check_dim(x.len())?;
        jet::eval(&self.root, x, &self.coords)
    }

    fn check_dim(&self, found: usize) -> Result<(), ExprError> {
        if found != self.coords.len() {
            return Err(ExprError::Dimension {
                expected: self.coords.len(),
                found,
            });
        }
        Ok(())
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(f, &self.root, &self.coords)
    }
}

pub(crate) fn render(node: &Node, coords: &[String]) -> String {
    struct Show<'a>(&'a Node, &'a [String]);
    impl fmt::Display for Show<'_> {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            write_node(f, self.0, self.1)
        }
    }
    Show(node, coords).to_string()
}

// Fully parenthesized so that printing then parsing gives back the same tree.
fn write_node(f: &mut fmt::Formatter<'_>, node: &Node, coords: &[String]) -> fmt::Result {
    match node {
        Node::Const(c) => write_number(f, *c),
        Node::Coord(i) => f.write_str(&coords[*i]),
        Node::Unary(Func::Neg, a) => {
            f.write_str("(-")?;
            write_node(f, a, coords)?;
            f.write_str(")")
        }
        Node::Unary(func, a) => {
            write!(f, "{}(", func.name())?;
            write_node(f, a, coords)?;
            f.write_str(")")
        }
        Node::Binary(op, a, b) => {
            f.write_str("(")?;
            write_node(f, a, coords)?;
            write!(f, " {} ", op.symbol())?;
            write_node(f, b, coords)?;
            f.write_str(")")
        }
        Node::Pow(a, c) => {
            f.write_str("(")?;
            write_node(f, a, coords)?;
            f.write_str("^")?;
            write_number(f, *c)?;
            f.write_str(")")
        }
    }
}

fn write_number(f: &mut fmt::Formatter<'_>, c: f64) -> fmt::Result {
    if c < 0.0 || (c == 0.0 && c.is_sign_negative()) {
        write!(f, "(-{:?})", -c)
    } else {
        write!(f, "{c:?}")
    }
}

fn domain(node: &Node, coords: &[String], reason: impl Into<String>) -> ExprError {
    ExprError::Domain {
        subexpression: render(node, coords),
        reason: reason.into(),
    }
}

fn is_integer(c: f64) -> bool {
    c.fract() == 0.0 && c.abs() < i32::MAX as f64
}

fn eval_node(node: &Node, x: &[f64], coords: &[String]) -> Result<f64, ExprError> {
    Ok(match node {
        Node::Const(c) => *c,
        Node::Coord(i) => x[*i],
        Node::Unary(func, a) => {
            let u = eval_node(a, x, coords)?;
            match func {
                Func::Neg => -u,
                Func::Sin => u.sin(),
                Func::Cos => u.cos(),
                Func::Exp => u.exp(),
                Func::Tanh => u.tanh(),
                Func::Log if u <= 0.0 => {
                    return Err(domain(node, coords, format!("log of non-positive value {u}")))
                }
                Func::Log => u.ln(),
                Func::Sqrt if u < 0.0 => {
                    return Err(domain(node, coords, format!("sqrt of negative value {u}")))
                }
                Func::Sqrt => u.sqrt(),
            }
        }
        Node::Binary(op, a, b) => {
            let u = eval_node(a, x, coords)?;
            let v = eval_node(b, x, coords)?;
            match op {
                BinOp::Add => u + v,
                BinOp::Sub => u - v,
                BinOp::Mul => u * v,
                BinOp::Div => {
                    if v.abs() < MIN_DIVISOR {
                        return Err(domain(node, coords, format!("division by {v:e}")));
                    }
                    u / v
                }
            }
        }
        Node::Pow(a, c) => {
            let u = eval_node(a, x, coords)?;
            check_pow_domain(node, coords, u, *c, false)?;
            if is_integer(*c) {
                u.powi(*c as i32)
            } else {
                u.powf(*c)
            }
        }
    })
}

/// `with_derivatives` additionally rejects bases where the first or second
/// derivative of `u^c` is singular.
fn check_pow_domain(
    node: &Node,
    coords: &[String],
    u: f64,
    c: f64,
    with_derivatives: bool,
) -> Result<(), ExprError> {
    if u < 0.0 && !is_integer(c) {
        return Err(domain(
            node,
            coords,
            format!("negative base {u} with non-integer exponent {c}"),
        ));
    }
    if u.abs() < MIN_DIVISOR {
        if c < 0.0 {
            return Err(domain(node, coords, format!("zero base with negative exponent {c}")));
        }
        if with_derivatives && !is_integer(c) && c < 2.0 {
            return Err(domain(
                node,
                coords,
                format!("derivative of u^{c} is singular at u = 0"),
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coords4() -> Vec<String> {
        ["x1", "x2", "x3", "x4"].iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn quotient_by_square_root() {
        let e = Expression::parse("(x1 - x3)/sqrt(2)", &coords4()).unwrap();
        let v = e.eval(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((v - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn zero_constant() {
        let e = Expression::parse("0", &coords4()).unwrap();
        assert_eq!(e.root(), &Node::Const(0.0));
        assert_eq!(e.eval(&[3.0, -1.0, 2.0, 7.0]).unwrap(), 0.0);
    }

    #[test]
    fn squared_sine() {
        let e = Expression::parse("sin(x1)^2", &["x1"]).unwrap();
        let v = e.eval(&[std::f64::consts::PI / 6.0]).unwrap();
        assert!((v - 0.25).abs() < 1e-15);
    }

    #[test]
    fn named_constants() {
        let e = Expression::parse("pi + e", &["x"]).unwrap();
        let v = e.eval(&[0.0]).unwrap();
        assert_eq!(v, std::f64::consts::PI + std::f64::consts::E);
        // coordinates shadow constant names
        let e = Expression::parse("e", &["e"]).unwrap();
        assert_eq!(e.eval(&[4.0]).unwrap(), 4.0);
    }

    #[test]
    fn precedence() {
        let c = ["x"];
        let e = Expression::parse("-x^2", &c).unwrap();
        assert_eq!(e.eval(&[3.0]).unwrap(), -9.0);
        let e = Expression::parse("2*-x + 1", &c).unwrap();
        assert_eq!(e.eval(&[3.0]).unwrap(), -5.0);
        let e = Expression::parse("x^-2", &c).unwrap();
        assert_eq!(e.eval(&[2.0]).unwrap(), 0.25);
        let e = Expression::parse("2^3^2", &c).unwrap();
        assert_eq!(e.eval(&[0.0]).unwrap(), 512.0);
        let e = Expression::parse("8/4/2", &c).unwrap();
        assert_eq!(e.eval(&[0.0]).unwrap(), 1.0);
        let e = Expression::parse("1 - 2 - 3", &c).unwrap();
        assert_eq!(e.eval(&[0.0]).unwrap(), -4.0);
    }

    #[test]
    fn parse_errors() {
        let c = ["x", "y"];
        assert!(matches!(
            Expression::parse("x +", &c),
            Err(ExprError::Syntax { .. })
        ));
        assert!(matches!(
            Expression::parse("z + 1", &c),
            Err(ExprError::UnknownIdentifier { ref name, column: 1 }) if name == "z"
        ));
        assert!(matches!(
            Expression::parse("sin(x, y)", &c),
            Err(ExprError::Arity { expected: 1, found: 2, .. })
        ));
        assert!(matches!(
            Expression::parse("sin", &c),
            Err(ExprError::Arity { found: 0, .. })
        ));
        assert!(matches!(
            Expression::parse("x^y", &c),
            Err(ExprError::Syntax { .. })
        ));
        assert!(matches!(Expression::parse("  ", &c), Err(ExprError::Empty)));
        assert!(matches!(
            Expression::parse("(x + 1", &c),
            Err(ExprError::Syntax { .. })
        ));
        assert!(matches!(
            Expression::parse("x $ 1", &c),
            Err(ExprError::Syntax { column: 3, .. })
        ));
    }

    #[test]
    fn domain_errors_name_the_subexpression() {
        let e = Expression::parse("1 + sqrt(x - 2)", &["x"]).unwrap();
        match e.eval(&[1.0]) {
            Err(ExprError::Domain { subexpression, .. }) => {
                assert_eq!(subexpression, "sqrt((x - 2.0))")
            }
            other => panic!("unexpected {other:?}"),
        }
        let e = Expression::parse("log(x)", &["x"]).unwrap();
        assert!(e.eval(&[0.0]).is_err());
        let e = Expression::parse("1/x", &["x"]).unwrap();
        assert!(e.eval(&[1e-301]).is_err());
        assert!(e.eval(&[1e-200]).is_ok());
        let e = Expression::parse("x^0.5", &["x"]).unwrap();
        assert!(e.eval(&[-1.0]).is_err());
        assert!(e.eval(&[0.0]).is_ok());
        assert!(e.eval_jet2(&[0.0]).is_err());
    }

    #[test]
    fn wrong_point_length() {
        let e = Expression::parse("x", &["x", "y"]).unwrap();
        assert_eq!(
            e.eval(&[1.0]),
            Err(ExprError::Dimension {
                expected: 2,
                found: 1
            })
        );
    }

    #[test]
    fn printing_round_trips() {
        let c = coords4();
        for text in [
            "(x1 - x3)/sqrt(2)",
            "-x1^-2.5 * exp(-x2)",
            "neg(x1) + tanh(x4)/log(x3)",
            "pi*x1 - e",
            "x1^2^3",
            "1e-7 * x2",
        ] {
            let e = Expression::parse(text, &c).unwrap();
            let printed = e.to_string();
            let again = Expression::parse(&printed, &c).unwrap();
            assert_eq!(e, again, "{text} -> {printed}");
        }
    }
}
