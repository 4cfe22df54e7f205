//! Recursive-descent parser for the concrete formula syntax.
//!
//! Precedence, loosest first: the binary temporal and spatial operators
//! (`U`, `S`, `reach`, `surround`, non-associative), then `|`, then `&`,
//! then the prefix operators.

use std::fmt;

use super::{CmpOp, DistanceBound, Formula, Interval};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Bang,
    Amp,
    Pipe,
    At,
    Cmp(CmpOp),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Num(x) => write!(f, "number {x}"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::LBracket => write!(f, "`[`"),
            Tok::RBracket => write!(f, "`]`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Bang => write!(f, "`!`"),
            Tok::Amp => write!(f, "`&`"),
            Tok::Pipe => write!(f, "`|`"),
            Tok::At => write!(f, "`@`"),
            Tok::Cmp(op) => write!(f, "`{}`", op.symbol()),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

const KEYWORDS: &[&str] = &[
    "true",
    "false",
    "U",
    "S",
    "F",
    "G",
    "O",
    "H",
    "reach",
    "escape",
    "somewhere",
    "everywhere",
    "surround",
    "infinity",
];

fn lex(input: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = input.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |line, column, message: String| ParseError {
        line,
        column,
        message,
    };
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            ',' => Some(Tok::Comma),
            '!' => Some(Tok::Bang),
            '&' => Some(Tok::Amp),
            '|' => Some(Tok::Pipe),
            '@' => Some(Tok::At),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Token {
                tok,
                line,
                column: col,
            });
            i += 1;
            col += 1;
            continue;
        }
        if c == '<' || c == '>' {
            let eq = chars.get(i + 1) == Some(&'=');
            let op = match (c, eq) {
                ('<', false) => CmpOp::Lt,
                ('<', true) => CmpOp::Le,
                ('>', false) => CmpOp::Gt,
                _ => CmpOp::Ge,
            };
            let len = if eq { 2 } else { 1 };
            out.push(Token {
                tok: Tok::Cmp(op),
                line,
                column: col,
            });
            i += len;
            col += len;
            continue;
        }
        let starts_number = c.is_ascii_digit()
            || (c == '-' || c == '.')
                && chars
                    .get(i + 1)
                    .is_some_and(|n| n.is_ascii_digit() || (c == '-' && *n == '.'));
        if starts_number {
            let mut j = i + 1;
            while j < chars.len() {
                let d = chars[j];
                let exp_sign = (d == '-' || d == '+') && matches!(chars[j - 1], 'e' | 'E');
                if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || exp_sign {
                    j += 1;
                } else {
                    break;
                }
            }
            let text: String = chars[i..j].iter().collect();
            let value: f64 = text
                .parse()
                .map_err(|_| err(start_line, start_col, format!("malformed number `{text}`")))?;
            out.push(Token {
                tok: Tok::Num(value),
                line,
                column: col,
            });
            col += j - i;
            i = j;
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let mut j = i + 1;
            while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            let text: String = chars[i..j].iter().collect();
            out.push(Token {
                tok: Tok::Ident(text),
                line,
                column: col,
            });
            col += j - i;
            i = j;
            continue;
        }
        return Err(err(line, col, format!("unexpected character `{c}`")));
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

enum BinaryOp {
    Until(Interval),
    Since(Interval),
    Reach(String, DistanceBound),
    Surround(String, DistanceBound),
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, token: &Token, message: impl Into<String>) -> ParseError {
        ParseError {
            line: token.line,
            column: token.column,
            message: message.into(),
        }
    }

    fn expect(&mut self, want: Tok) -> Result<Token, ParseError> {
        let t = self.next();
        if t.tok == want {
            Ok(t)
        } else {
            Err(self.error_at(&t, format!("expected {want}, found {}", t.tok)))
        }
    }

    fn peek_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        let t = self.next();
        match t.tok {
            Tok::Num(x) => Ok(x),
            ref other => Err(self.error_at(&t, format!("expected a number, found {other}"))),
        }
    }

    fn interval(&mut self) -> Result<Interval, ParseError> {
        let open = self.expect(Tok::LBracket)?;
        let lo = self.number()?;
        self.expect(Tok::Comma)?;
        let hi = self.number()?;
        self.expect(Tok::RBracket)?;
        let interval = Interval::new(lo, hi);
        if !interval.is_valid() {
            return Err(self.error_at(
                &open,
                format!("invalid interval [{lo},{hi}]: need 0 <= lo <= hi"),
            ));
        }
        Ok(interval)
    }

    fn distance_spec(&mut self) -> Result<(String, DistanceBound), ParseError> {
        self.expect(Tok::LParen)?;
        let t = self.next();
        let name = match t.tok {
            Tok::Ident(ref s) if !KEYWORDS.contains(&s.as_str()) => s.clone(),
            ref other => {
                return Err(self.error_at(&t, format!("expected a distance name, found {other}")))
            }
        };
        self.expect(Tok::RParen)?;
        self.expect(Tok::LBracket)?;
        let t = self.next();
        let op = match t.tok {
            Tok::Cmp(op) => op,
            ref other => {
                return Err(self.error_at(
                    &t,
                    format!("expected a comparison in distance bound, found {other}"),
                ))
            }
        };
        let value = if self.peek_keyword("infinity") {
            self.next();
            f64::INFINITY
        } else {
            let t = self.peek().clone();
            let v = self.number()?;
            if v.is_nan() || v < 0.0 {
                return Err(self.error_at(&t, "distance bound must be non-negative"));
            }
            v
        };
        self.expect(Tok::RBracket)?;
        Ok((name, DistanceBound::new(op, value)))
    }

    fn binary_op(&mut self) -> Result<Option<BinaryOp>, ParseError> {
        let op = if self.peek_keyword("U") {
            self.next();
            BinaryOp::Until(self.interval()?)
        } else if self.peek_keyword("S") {
            self.next();
            BinaryOp::Since(self.interval()?)
        } else if self.peek_keyword("reach") {
            self.next();
            let (d, b) = self.distance_spec()?;
            BinaryOp::Reach(d, b)
        } else if self.peek_keyword("surround") {
            self.next();
            let (d, b) = self.distance_spec()?;
            BinaryOp::Surround(d, b)
        } else {
            return Ok(None);
        };
        Ok(Some(op))
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let left = self.disjunction()?;
        let Some(op) = self.binary_op()? else {
            return Ok(left);
        };
        let right = self.disjunction()?;
        let at = self.peek().clone();
        if self.binary_op()?.is_some() {
            return Err(self.error_at(
                &at,
                "binary temporal and spatial operators do not associate; add parentheses",
            ));
        }
        let (left, right) = (Box::new(left), Box::new(right));
        Ok(match op {
            BinaryOp::Until(interval) => Formula::Until {
                interval,
                left,
                right,
            },
            BinaryOp::Since(interval) => Formula::Since {
                interval,
                left,
                right,
            },
            BinaryOp::Reach(distance, bound) => Formula::Reach {
                distance,
                bound,
                left,
                right,
            },
            BinaryOp::Surround(distance, bound) => Formula::Surround {
                distance,
                bound,
                left,
                right,
            },
        })
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.conjunction()?;
        while self.peek().tok == Tok::Pipe {
            self.next();
            let rhs = self.conjunction()?;
            f = f.or(rhs);
        }
        Ok(f)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.unary()?;
        while self.peek().tok == Tok::Amp {
            self.next();
            let rhs = self.unary()?;
            f = f.and(rhs);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        if self.peek().tok == Tok::Bang {
            self.next();
            return Ok(self.unary()?.negated());
        }
        for kw in ["F", "G", "O", "H"] {
            if self.peek_keyword(kw) {
                self.next();
                let i = self.interval()?;
                let sub = Box::new(self.unary()?);
                return Ok(match kw {
                    "F" => Formula::Eventually(i, sub),
                    "G" => Formula::Globally(i, sub),
                    "O" => Formula::Once(i, sub),
                    _ => Formula::Historically(i, sub),
                });
            }
        }
        for kw in ["escape", "somewhere", "everywhere"] {
            if self.peek_keyword(kw) {
                self.next();
                let (distance, bound) = self.distance_spec()?;
                let sub = Box::new(self.unary()?);
                return Ok(match kw {
                    "escape" => Formula::Escape {
                        distance,
                        bound,
                        sub,
                    },
                    "somewhere" => Formula::Somewhere {
                        distance,
                        bound,
                        sub,
                    },
                    _ => Formula::Everywhere {
                        distance,
                        bound,
                        sub,
                    },
                });
            }
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        let t = self.next();
        match t.tok {
            Tok::LParen => {
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::At => {
                let n = self.next();
                match n.tok {
                    Tok::Num(x) if x >= 0.0 && x.fract() == 0.0 && x < usize::MAX as f64 => {
                        Ok(Formula::At(x as usize))
                    }
                    ref other => {
                        Err(self.error_at(&n, format!("expected a location id, found {other}")))
                    }
                }
            }
            Tok::Ident(ref s) if s == "true" => Ok(Formula::True),
            Tok::Ident(ref s) if s == "false" => Ok(Formula::True.negated()),
            Tok::Ident(ref s) if KEYWORDS.contains(&s.as_str()) => {
                Err(self.error_at(&t, format!("unexpected keyword `{s}`")))
            }
            Tok::Ident(name) => {
                if let Tok::Cmp(op) = self.peek().tok {
                    self.next();
                    let threshold = self.number()?;
                    Ok(Formula::Cmp {
                        channel: name,
                        op,
                        threshold,
                    })
                } else {
                    Ok(Formula::Atomic(name))
                }
            }
            ref other => Err(self.error_at(&t, format!("expected a formula, found {other}"))),
        }
    }
}

/// Parses a formula. `false` is read as `!true`.
pub fn parse(input: &str) -> Result<Formula, ParseError> {
    let mut p = Parser {
        tokens: lex(input)?,
        pos: 0,
    };
    let f = p.formula()?;
    let t = p.peek().clone();
    if t.tok != Tok::Eof {
        return Err(p.error_at(&t, format!("unexpected {} after formula", t.tok)));
    }
    Ok(f)
}
