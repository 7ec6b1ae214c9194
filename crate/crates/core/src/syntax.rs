//! Surface syntax for formulas.
//!
//! ```text
//! or      := and ('|' and)*
//! and     := unary ('&' unary)*
//! unary   := '!' unary | modal unary | modal '(' or ';' or ')' | atom | '(' or ')'
//! modal   := '<>' | '<' SPEC '>' | '<U>' | '[' SPEC ',U]'
//! atom    := 'l' DIGITS | 'true' | 'false'
//! ```
//!
//! `<>` is the existential modality, `<U>` its global counterpart and
//! `[SPEC,U]` the global form of any built-in quantifier. Width-2 modalities
//! take a parenthesized pair separated by `;`.

use thiserror::Error;

use crate::formula::{Formula, Node};
use crate::graph::LabelId;
use crate::quantifier::{builtin, Quantifier};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("syntax error at byte {pos}: {message}")]
pub struct SyntaxError {
    pub pos: usize,
    pub message: String,
}

fn err<T>(pos: usize, message: impl Into<String>) -> Result<T, SyntaxError> {
    Err(SyntaxError { pos, message: message.into() })
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

enum Modality {
    Local(Quantifier),
    Global(Quantifier),
}

impl<'a> Parser<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), SyntaxError> {
        if self.eat(c) {
            Ok(())
        } else {
            err(self.pos, format!("expected '{c}'"))
        }
    }

    fn or(&mut self) -> Result<Formula, SyntaxError> {
        let mut parts = vec![self.and()?];
        while self.eat('|') {
            parts.push(self.and()?);
        }
        Ok(Formula::or(parts))
    }

    fn and(&mut self) -> Result<Formula, SyntaxError> {
        let mut parts = vec![self.unary()?];
        while self.eat('&') {
            parts.push(self.unary()?);
        }
        Ok(Formula::and(parts))
    }

    fn unary(&mut self) -> Result<Formula, SyntaxError> {
        let start = self.pos;
        match self.peek() {
            None => err(self.pos, "unexpected end of input"),
            Some('!') => {
                self.pos += 1;
                Ok(Formula::not(self.unary()?))
            }
            Some('(') => {
                self.pos += 1;
                let f = self.or()?;
                self.expect(')')?;
                Ok(f)
            }
            Some('<') | Some('[') => {
                let modality = self.modality()?;
                let (q, global) = match modality {
                    Modality::Local(q) => (q, false),
                    Modality::Global(q) => (q, true),
                };
                let args = if q.width() == 2 {
                    self.expect('(')?;
                    let a = self.or()?;
                    self.expect(';')?;
                    let b = self.or()?;
                    self.expect(')')?;
                    vec![a, b]
                } else {
                    vec![self.unary()?]
                };
                let built = if global {
                    Formula::try_global(q, args)
                } else {
                    Formula::try_modal(q, args)
                };
                built.or_else(|e| err(start, e.to_string()))
            }
            Some(_) => self.atom(),
        }
    }

    fn modality(&mut self) -> Result<Modality, SyntaxError> {
        let start = self.pos;
        if self.eat('[') {
            let rest = self.rest();
            let Some(end) = rest.find(']') else {
                return err(start, "unterminated '['");
            };
            let inner = &rest[..end];
            let Some(spec) = inner.trim().strip_suffix("U").map(str::trim_end) else {
                return err(start, "expected '[SPEC,U]'");
            };
            let Some(spec) = spec.strip_suffix(',') else {
                return err(start, "expected '[SPEC,U]'");
            };
            let q = builtin(spec).or_else(|e| err(start, e.to_string()))?;
            self.pos += end + 1;
            return Ok(Modality::Global(q));
        }
        self.expect('<')?;
        let rest = self.rest();
        if let Some(after) = rest.strip_prefix('>') {
            self.pos = self.src.len() - after.len();
            return Ok(Modality::Local(Quantifier::exists()));
        }
        let body_len = if let Some(after) = rest.strip_prefix("pct>") {
            after.find('>').map(|i| i + 4)
        } else {
            rest.find('>')
        };
        let Some(len) = body_len else {
            return err(start, "unterminated '<'");
        };
        let spec = rest[..len].trim();
        self.pos += len + 1;
        if spec == "U" {
            return Ok(Modality::Global(Quantifier::exists()));
        }
        let q = builtin(spec).or_else(|e| err(start, e.to_string()))?;
        Ok(Modality::Local(q))
    }

    fn atom(&mut self) -> Result<Formula, SyntaxError> {
        let start = self.pos;
        let rest = self.rest();
        let word_len = rest
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(rest.len());
        let word = &rest[..word_len];
        if word.is_empty() {
            return err(start, format!("unexpected {:?}", rest.chars().next().unwrap_or(' ')));
        }
        self.pos += word_len;
        match word {
            "true" => Ok(Formula::top()),
            "false" => Ok(Formula::bot()),
            _ => match word.strip_prefix('l').map(str::parse::<LabelId>) {
                Some(Ok(k)) => Ok(Formula::prop(k)),
                _ => err(start, format!("unknown atom {word:?}")),
            },
        }
    }
}

/// Parses the surface syntax; `l<k>` becomes `Prop(k)` verbatim.
pub fn parse_formula(text: &str) -> Result<Formula, SyntaxError> {
    let mut p = Parser { src: text, pos: 0 };
    let f = p.or()?;
    p.skip_ws();
    if p.pos != text.len() {
        return err(p.pos, "trailing input");
    }
    Ok(f)
}

/// Renders with `l<id>` atoms.
pub fn render(f: &Formula) -> String {
    render_with(f, &|p| format!("l{p}"))
}

/// Renders with a custom atom printer.
pub fn render_with(f: &Formula, atom: &dyn Fn(LabelId) -> String) -> String {
    let mut out = String::new();
    write_or(f, atom, &mut out);
    out
}

fn write_or(f: &Formula, atom: &dyn Fn(LabelId) -> String, out: &mut String) {
    match f.node() {
        Node::Or(fs) => {
            for (i, g) in fs.iter().enumerate() {
                if i > 0 {
                    out.push_str(" | ");
                }
                write_and(g, atom, out);
            }
        }
        _ => write_and(f, atom, out),
    }
}

fn write_and(f: &Formula, atom: &dyn Fn(LabelId) -> String, out: &mut String) {
    match f.node() {
        Node::And(fs) => {
            for (i, g) in fs.iter().enumerate() {
                if i > 0 {
                    out.push_str(" & ");
                }
                write_unary(g, atom, out);
            }
        }
        _ => write_unary(f, atom, out),
    }
}

fn write_unary(f: &Formula, atom: &dyn Fn(LabelId) -> String, out: &mut String) {
    match f.node() {
        Node::Bot => out.push_str("false"),
        Node::Prop(p) => out.push_str(&atom(*p)),
        Node::Not(g) if matches!(g.node(), Node::Bot) => out.push_str("true"),
        Node::Not(g) => {
            out.push('!');
            write_unary(g, atom, out);
        }
        Node::And(_) | Node::Or(_) => {
            out.push('(');
            write_or(f, atom, out);
            out.push(')');
        }
        Node::Modal(q, args) | Node::Global(q, args) => {
            let global = matches!(f.node(), Node::Global(..));
            match (global, q.id()) {
                (false, "exists") => out.push_str("<>"),
                (true, "exists") => out.push_str("<U>"),
                (false, id) => {
                    out.push('<');
                    out.push_str(id);
                    out.push('>');
                }
                (true, id) => {
                    out.push('[');
                    out.push_str(id);
                    out.push_str(",U]");
                }
            }
            if args.len() == 2 {
                out.push('(');
                write_or(&args[0], atom, out);
                out.push_str("; ");
                write_or(&args[1], atom, out);
                out.push(')');
            } else {
                let arg = &args[0];
                if !matches!(arg.node(), Node::And(_) | Node::Or(_)) {
                    out.push(' ');
                }
                write_unary(arg, atom, out);
            }
        }
    }
}
