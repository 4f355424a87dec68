use super::{eval_node, BinOp, ExprError, Func, Node};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    // 1-based character column
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ExprError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let simple = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(tok) = simple {
            out.push(Token { tok, column });
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let literal: String = chars[start..i].iter().collect();
            let value: f64 = literal.parse().map_err(|_| ExprError::Syntax {
                column,
                message: format!("malformed number `{literal}`"),
            })?;
            out.push(Token {
                tok: Tok::Num(value),
                column,
            });
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                column,
            });
        } else {
            return Err(ExprError::Syntax {
                column,
                message: format!("unexpected character `{c}`"),
            });
        }
    }
    out.push(Token {
        tok: Tok::End,
        column: chars.len() + 1,
    });
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    coords: &'a [String],
}

pub(super) fn parse(text: &str, coords: &[String]) -> Result<Node, ExprError> {
    let tokens = lex(text)?;
    if tokens.len() == 1 {
        return Err(ExprError::Empty);
    }
    let mut parser = Parser {
        tokens,
        pos: 0,
        coords,
    };
    let node = parser.expr()?;
    let trailing = parser.peek();
    if trailing.tok != Tok::End {
        return Err(parser.unexpected(&trailing));
    }
    Ok(node)
}

impl Parser<'_> {
    fn peek(&self) -> Token {
        self.tokens[self.pos].clone()
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.tok != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, t: &Token) -> ExprError {
        let message = match &t.tok {
            Tok::End => "unexpected end of input".to_string(),
            other => format!("unexpected token {other:?}"),
        };
        ExprError::Syntax {
            column: t.column,
            message,
        }
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        if self.peek().tok == Tok::Minus {
            self.bump();
            let inner = self.unary()?;
            return Ok(Node::Unary(Func::Neg, Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.primary()?;
        if self.peek().tok != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let at = self.peek();
        let exponent = self.exponent()?;
        if !exponent.is_constant() {
            return Err(ExprError::Syntax {
                column: at.column,
                message: "exponent must be a constant".into(),
            });
        }
        let value = eval_node(&exponent, &[], self.coords).map_err(|e| ExprError::Syntax {
            column: at.column,
            message: format!("exponent does not evaluate: {e}"),
        })?;
        if !value.is_finite() {
            return Err(ExprError::Syntax {
                column: at.column,
                message: "exponent is not finite".into(),
            });
        }
        Ok(Node::Pow(Box::new(base), value))
    }

    fn exponent(&mut self) -> Result<Node, ExprError> {
        if self.peek().tok == Tok::Minus {
            self.bump();
            let inner = self.exponent()?;
            return Ok(Node::Unary(Func::Neg, Box::new(inner)));
        }
        self.power()
    }

    fn primary(&mut self) -> Result<Node, ExprError> {
        let t = self.bump();
        match t.tok {
            Tok::Num(v) => Ok(Node::Const(v)),
            Tok::LParen => {
                let inner = self.expr()?;
                let close = self.bump();
                if close.tok != Tok::RParen {
                    return Err(ExprError::Syntax {
                        column: close.column,
                        message: "expected `)`".into(),
                    });
                }
                Ok(inner)
            }
            Tok::Ident(name) => self.identifier(name, t.column),
            _ => Err(self.unexpected(&t)),
        }
    }

    fn identifier(&mut self, name: String, column: usize) -> Result<Node, ExprError> {
        if let Some(i) = self.coords.iter().position(|c| *c == name) {
            return Ok(Node::Coord(i));
        }
        if let Some(func) = Func::from_name(&name) {
            if self.peek().tok != Tok::LParen {
                return Err(ExprError::Arity {
                    name,
                    column,
                    expected: 1,
                    found: 0,
                });
            }
            self.bump();
            let mut args = Vec::new();
            if self.peek().tok != Tok::RParen {
                args.push(self.expr()?);
                while self.peek().tok == Tok::Comma {
                    self.bump();
                    args.push(self.expr()?);
                }
            }
            let close = self.bump();
            if close.tok != Tok::RParen {
                return Err(ExprError::Syntax {
                    column: close.column,
                    message: "expected `)` or `,`".into(),
                });
            }
            if args.len() != 1 {
                return Err(ExprError::Arity {
                    name,
                    column,
                    expected: 1,
                    found: args.len(),
                });
            }
            let arg = args.pop().expect("one argument");
            return Ok(Node::Unary(func, Box::new(arg)));
        }
        match name.as_str() {
            "pi" => Ok(Node::Const(std::f64::consts::PI)),
            "e" => Ok(Node::Const(std::f64::consts::E)),
            _ => Err(ExprError::UnknownIdentifier { name, column }),
        }
    }
}
