//! Reader for the pure-Prolog subset: facts, rules, `\+` negation, list
//! syntax and `%` comments. Queries additionally accept mode arguments.

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::program::{Clause, Program, Query, QueryArg};
use crate::term::{Atom, Literal, Term, Var, VarId, VarKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Name(String),
    Var(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Bar,
    Neck,
    Naf,
    End,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Name(n) => format!("'{n}'"),
            Tok::Var(v) => format!("variable {v}"),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::LBracket => "'['".into(),
            Tok::RBracket => "']'".into(),
            Tok::Comma => "','".into(),
            Tok::Bar => "'|'".into(),
            Tok::Neck => "':-'".into(),
            Tok::Naf => "'\\+'".into(),
            Tok::End => "'.'".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

/// Spelling of an input mode inside query arguments, besides `i`.
const INPUT_MODE_GLYPH: char = '\u{2110}';

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, message: String| ParseError { line, col, message };
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let mut advance = |n: usize, i: &mut usize| {
            for _ in 0..n {
                if chars[*i] == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                *i += 1;
            }
        };
        if c.is_whitespace() {
            advance(1, &mut i);
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                advance(1, &mut i);
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            advance(2, &mut i);
            loop {
                if i >= chars.len() {
                    return Err(err(tl, tc, "unterminated block comment".into()));
                }
                if chars[i] == '*' && chars.get(i + 1) == Some(&'/') {
                    advance(2, &mut i);
                    break;
                }
                advance(1, &mut i);
            }
            continue;
        }
        let tok = if c.is_ascii_lowercase() || c.is_ascii_digit() {
            let start = i;
            let digits = c.is_ascii_digit();
            while i < chars.len()
                && (if digits {
                    chars[i].is_ascii_digit()
                } else {
                    chars[i].is_alphanumeric() || chars[i] == '_'
                })
            {
                advance(1, &mut i);
            }
            Tok::Name(chars[start..i].iter().collect())
        } else if c.is_ascii_uppercase() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                advance(1, &mut i);
            }
            Tok::Var(chars[start..i].iter().collect())
        } else if c == INPUT_MODE_GLYPH {
            advance(1, &mut i);
            Tok::Name(INPUT_MODE_GLYPH.to_string())
        } else if c == '\'' {
            advance(1, &mut i);
            let mut name = String::new();
            loop {
                match chars.get(i) {
                    None | Some('\n') => {
                        return Err(err(tl, tc, "unterminated quoted atom".into()))
                    }
                    Some('\'') if chars.get(i + 1) == Some(&'\'') => {
                        name.push('\'');
                        advance(2, &mut i);
                    }
                    Some('\'') => {
                        advance(1, &mut i);
                        break;
                    }
                    Some('\\') if i + 1 < chars.len() => {
                        name.push(chars[i + 1]);
                        advance(2, &mut i);
                    }
                    Some(&ch) => {
                        name.push(ch);
                        advance(1, &mut i);
                    }
                }
            }
            Tok::Name(name)
        } else {
            let (tok, len) = match c {
                '(' => (Tok::LParen, 1),
                ')' => (Tok::RParen, 1),
                '[' => (Tok::LBracket, 1),
                ']' => (Tok::RBracket, 1),
                ',' => (Tok::Comma, 1),
                '|' => (Tok::Bar, 1),
                ':' if chars.get(i + 1) == Some(&'-') => (Tok::Neck, 2),
                '\\' if chars.get(i + 1) == Some(&'+') => (Tok::Naf, 2),
                '.' if chars
                    .get(i + 1)
                    .map_or(true, |n| n.is_whitespace() || *n == '%') =>
                {
                    (Tok::End, 1)
                }
                other => return Err(err(tl, tc, format!("unexpected character '{other}'"))),
            };
            advance(len, &mut i);
            tok
        };
        out.push(Spanned {
            tok,
            line: tl,
            col: tc,
        });
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

/// Per-clause (or per-query) variable table.
#[derive(Default)]
struct Scope {
    names: HashMap<String, u32>,
    next: u32,
}

impl Scope {
    fn named(&mut self, name: &str) -> Var {
        if name == "_" {
            return self.anonymous("_");
        }
        let id = match self.names.get(name) {
            Some(&id) => id,
            None => {
                let id = self.next;
                self.next += 1;
                self.names.insert(name.to_string(), id);
                id
            }
        };
        Var::new(VarId(id), VarKind::Ordinary, name)
    }

    fn anonymous(&mut self, name: &str) -> Var {
        let id = self.next;
        self.next += 1;
        Var::new(VarId(id), VarKind::Ordinary, name)
    }
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

/// How bare `i` / `o` names inside arguments are read.
#[derive(Clone, Copy, PartialEq, Eq)]
enum ArgMode {
    Program,
    Query,
}

enum Arg {
    Term(Term),
    InputMode,
}

impl Parser {
    fn at(&self, pos: usize) -> &Spanned {
        &self.toks[pos.min(self.toks.len() - 1)]
    }

    fn peek(&self) -> &Tok {
        &self.at(self.pos).tok
    }

    fn bump(&mut self) -> Spanned {
        let t = self.at(self.pos).clone();
        self.pos += 1;
        t
    }

    fn error_here(&self, message: impl Into<String>) -> ParseError {
        let t = self.at(self.pos);
        ParseError {
            line: t.line,
            col: t.col,
            message: message.into(),
        }
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.error_here(format!(
                "expected {}, found {}",
                want.describe(),
                self.peek().describe()
            )))
        }
    }

    fn atom(&mut self, scope: &mut Scope) -> Result<Atom, ParseError> {
        let name = match self.bump().tok {
            Tok::Name(n) => n,
            other => {
                self.pos -= 1;
                return Err(self.error_here(format!(
                    "expected a predicate name, found {}",
                    other.describe()
                )));
            }
        };
        let args = if *self.peek() == Tok::LParen {
            self.bump();
            self.term_list(scope, ArgMode::Program, 0)?
                .into_iter()
                .map(|a| match a {
                    Arg::Term(t) => t,
                    Arg::InputMode => unreachable!("input modes only in queries"),
                })
                .collect()
        } else {
            Vec::new()
        };
        Ok(Atom::new(name, args))
    }

    /// Parses `t1, ..., tn )`.
    fn term_list(
        &mut self,
        scope: &mut Scope,
        mode: ArgMode,
        depth: usize,
    ) -> Result<Vec<Arg>, ParseError> {
        let mut args = Vec::new();
        loop {
            let position = args.len();
            args.push(self.arg(scope, mode, depth, position)?);
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                }
                Tok::RParen => {
                    self.bump();
                    return Ok(args);
                }
                other => {
                    return Err(self.error_here(format!(
                        "expected ',' or ')', found {}",
                        other.describe()
                    )))
                }
            }
        }
    }

    fn arg(
        &mut self,
        scope: &mut Scope,
        mode: ArgMode,
        depth: usize,
        position: usize,
    ) -> Result<Arg, ParseError> {
        if mode == ArgMode::Query {
            if let Tok::Name(n) = self.peek() {
                let is_mode = n == "i" || n == "o" || n == &INPUT_MODE_GLYPH.to_string();
                let bare = self.at(self.pos + 1).tok != Tok::LParen;
                if is_mode && bare {
                    if depth > 0 {
                        return Err(
                            self.error_here("modes are only allowed as whole query arguments")
                        );
                    }
                    let input = n != "o";
                    self.bump();
                    return Ok(if input {
                        Arg::InputMode
                    } else {
                        Arg::Term(Term::Var(scope.anonymous(&format!("V{}", position + 1))))
                    });
                }
            }
        }
        self.term(scope, mode, depth).map(Arg::Term)
    }

    fn term(&mut self, scope: &mut Scope, mode: ArgMode, depth: usize) -> Result<Term, ParseError> {
        let t = self.bump();
        match t.tok {
            Tok::Var(name) => Ok(Term::Var(scope.named(&name))),
            Tok::Name(name) => {
                if *self.peek() == Tok::LParen {
                    self.bump();
                    let args = self
                        .term_list(scope, mode, depth + 1)?
                        .into_iter()
                        .map(|a| match a {
                            Arg::Term(t) => t,
                            Arg::InputMode => unreachable!(),
                        })
                        .collect();
                    Ok(Term::func(name, args))
                } else {
                    Ok(Term::constant(name))
                }
            }
            Tok::LBracket => {
                if *self.peek() == Tok::RBracket {
                    self.bump();
                    return Ok(Term::nil());
                }
                let mut items = vec![self.list_item(scope, mode, depth)?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    items.push(self.list_item(scope, mode, depth)?);
                }
                let tail = if *self.peek() == Tok::Bar {
                    self.bump();
                    self.list_item(scope, mode, depth)?
                } else {
                    Term::nil()
                };
                self.expect(Tok::RBracket)?;
                Ok(items
                    .into_iter()
                    .rev()
                    .fold(tail, |acc, item| Term::cons(item, acc)))
            }
            other => {
                self.pos -= 1;
                Err(self.error_here(format!("expected a term, found {}", other.describe())))
            }
        }
    }

    fn list_item(&mut self, scope: &mut Scope, mode: ArgMode, depth: usize) -> Result<Term, ParseError> {
        if mode == ArgMode::Query {
            if let Tok::Name(n) = self.peek() {
                let bare = self.at(self.pos + 1).tok != Tok::LParen;
                if bare && (n == "i" || n == "o" || n == &INPUT_MODE_GLYPH.to_string()) {
                    return Err(self.error_here("modes are only allowed as whole query arguments"));
                }
            }
        }
        self.term(scope, mode, depth + 1)
    }

    fn literal(&mut self, scope: &mut Scope) -> Result<Literal, ParseError> {
        if *self.peek() == Tok::Naf {
            self.bump();
            Ok(Literal::negative(self.atom(scope)?))
        } else {
            Ok(Literal::positive(self.atom(scope)?))
        }
    }

    fn clause(&mut self, index: usize) -> Result<Clause, ParseError> {
        let mut scope = Scope::default();
        let head = self.atom(&mut scope)?;
        let mut body = Vec::new();
        match self.peek() {
            Tok::Neck => {
                self.bump();
                body.push(self.literal(&mut scope)?);
                while *self.peek() == Tok::Comma {
                    self.bump();
                    body.push(self.literal(&mut scope)?);
                }
                self.expect(Tok::End)?;
            }
            Tok::End => {
                self.bump();
            }
            other => {
                return Err(self.error_here(format!(
                    "expected ':-' or '.', found {}",
                    other.describe()
                )))
            }
        }
        Ok(Clause {
            label: format!("C_{}", index + 1),
            head,
            body,
            var_count: scope.next,
        })
    }
}

/// Parses a program. Clauses are labelled `C_1`, `C_2`, ... in source order.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let mut clauses = Vec::new();
    while *p.peek() != Tok::Eof {
        let c = p.clause(clauses.len())?;
        clauses.push(c);
    }
    Ok(Program::new(clauses))
}

/// Parses a query such as `subset1(o,i)`, `p(i)` or `append([a],[b],Z)`.
///
/// `i` (or `ℐ`) is an input mode, `o` a fresh variable; both are only
/// accepted as whole arguments. A trailing `.` is optional.
pub fn parse_query(text: &str) -> Result<Query, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let mut scope = Scope::default();
    let name = match p.bump().tok {
        Tok::Name(n) => n,
        other => {
            p.pos = 0;
            return Err(p.error_here(format!(
                "expected a predicate name, found {}",
                other.describe()
            )));
        }
    };
    let mut args = Vec::new();
    if *p.peek() == Tok::LParen {
        p.bump();
        for a in p.term_list(&mut scope, ArgMode::Query, 0)? {
            args.push(match a {
                Arg::Term(t) => QueryArg::Term(t),
                Arg::InputMode => QueryArg::InputMode,
            });
        }
    }
    if *p.peek() == Tok::End {
        p.bump();
    }
    if *p.peek() != Tok::Eof {
        return Err(p.error_here(format!(
            "unexpected {} after query",
            p.peek().describe()
        )));
    }
    Ok(Query {
        pred: Arc::from(name),
        args,
        var_count: scope.next,
    })
}
