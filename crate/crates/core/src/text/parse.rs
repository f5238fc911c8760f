use std::fmt;

use crate::logic::{
    is_constant_token, ClassSpec, Connective, Formula, Quantifier, RelationSymbol, SpecError, Term,
    Vocabulary,
};

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TextError {
    #[error("syntax error at {pos}: expected {expected}, found {found}")]
    Syntax {
        pos: Pos,
        expected: String,
        found: String,
    },
    #[error("invalid class specification: {0}")]
    Invalid(#[from] SpecError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Open,
    Close,
    Word(String),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Open => f.write_str("'('"),
            Tok::Close => f.write_str("')'"),
            Tok::Word(w) => write!(f, "'{w}'"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn lex(text: &str) -> Vec<(Tok, Pos)> {
    let mut out = Vec::new();
    let mut line = 1;
    let mut col = 1;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let pos = Pos { line, col };
        if c == '\n' {
            chars.next();
            line += 1;
            col = 1;
        } else if c.is_whitespace() {
            chars.next();
            col += 1;
        } else if c == ';' {
            while let Some(&c) = chars.peek() {
                if c == '\n' {
                    break;
                }
                chars.next();
            }
        } else if c == '(' {
            chars.next();
            col += 1;
            out.push((Tok::Open, pos));
        } else if c == ')' {
            chars.next();
            col += 1;
            out.push((Tok::Close, pos));
        } else {
            let mut w = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                    break;
                }
                w.push(c);
                chars.next();
                col += 1;
            }
            out.push((Tok::Word(w), pos));
        }
    }
    out.push((Tok::Eof, Pos { line, col }));
    out
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

type PResult<T> = Result<T, TextError>;

fn is_name(w: &str) -> bool {
    let mut chars = w.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || "_#.'-".contains(c))
}

impl Parser {
    fn new(text: &str) -> Self {
        Self {
            toks: lex(text),
            at: 0,
        }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.at + k).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn fail<T>(&self, expected: &str) -> PResult<T> {
        Err(TextError::Syntax {
            pos: self.pos(),
            expected: expected.to_string(),
            found: self.peek().to_string(),
        })
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn open(&mut self) -> PResult<()> {
        if *self.peek() == Tok::Open {
            self.bump();
            Ok(())
        } else {
            self.fail("'('")
        }
    }

    fn close(&mut self) -> PResult<()> {
        if *self.peek() == Tok::Close {
            self.bump();
            Ok(())
        } else {
            self.fail("')'")
        }
    }

    fn keyword(&mut self, kw: &str) -> PResult<()> {
        match self.peek() {
            Tok::Word(w) if w == kw => {
                self.bump();
                Ok(())
            }
            _ => self.fail(&format!("'{kw}'")),
        }
    }

    fn word(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Word(w) => {
                self.bump();
                Ok(w)
            }
            _ => self.fail(what),
        }
    }

    fn name(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Word(w) if is_name(&w) => {
                self.bump();
                Ok(w)
            }
            _ => self.fail(what),
        }
    }

    fn int<T: std::str::FromStr>(&mut self, what: &str) -> PResult<T> {
        match self.peek().clone() {
            Tok::Word(w) => match w.parse::<T>() {
                Ok(v) => {
                    self.bump();
                    Ok(v)
                }
                Err(_) => self.fail(what),
            },
            _ => self.fail(what),
        }
    }

    fn term(&mut self) -> PResult<Term> {
        match self.peek().clone() {
            Tok::Word(w) if is_constant_token(&w) => match w[1..].parse::<usize>() {
                Ok(i) => {
                    self.bump();
                    Ok(Term::Const(i))
                }
                Err(_) => self.fail("constant index"),
            },
            Tok::Word(w) if is_name(&w) => {
                self.bump();
                Ok(Term::Var(w))
            }
            _ => self.fail("variable or constant"),
        }
    }

    fn vocab(&mut self) -> PResult<Vocabulary> {
        self.open()?;
        self.keyword("vocab")?;
        let mut relations = Vec::new();
        loop {
            self.open()?;
            match self.peek() {
                Tok::Word(w) if w == "rel" => {
                    self.bump();
                    let name = self.name("relation name")?;
                    let arity = self.int::<usize>("arity")?;
                    self.close()?;
                    relations.push(RelationSymbol::new(name, arity));
                }
                Tok::Word(w) if w == "consts" => {
                    self.bump();
                    let k = self.int::<usize>("constant count")?;
                    self.close()?;
                    self.close()?;
                    return Ok(Vocabulary::new(relations, k));
                }
                _ => return self.fail("'rel' or 'consts'"),
            }
        }
    }

    fn formula(&mut self) -> PResult<Formula> {
        self.open()?;
        let head = self.word("formula head")?;
        let f = match head.as_str() {
            "true" => Formula::True,
            "false" => Formula::False,
            "=" => {
                let a = self.term()?;
                let b = self.term()?;
                Formula::Eq(a, b)
            }
            "not" => Formula::not(self.formula()?),
            "and" | "or" => {
                let op = if head == "and" {
                    Connective::And
                } else {
                    Connective::Or
                };
                let mut acc = self.formula()?;
                acc = Formula::binary(op, acc, self.formula()?);
                while *self.peek() == Tok::Open {
                    acc = Formula::binary(op, acc, self.formula()?);
                }
                acc
            }
            "implies" | "iff" => {
                let op = if head == "implies" {
                    Connective::Implies
                } else {
                    Connective::Iff
                };
                let l = self.formula()?;
                let r = self.formula()?;
                Formula::binary(op, l, r)
            }
            "exists" | "forall" => {
                let q = if head == "exists" {
                    Quantifier::Exists
                } else {
                    Quantifier::Forall
                };
                let v = self.name("variable")?;
                Formula::quant(q, v, self.formula()?)
            }
            "count" => {
                let r = self.int::<u32>("residue")?;
                let m = self.int::<u32>("modulus")?;
                let v = self.name("variable")?;
                Formula::count(r, m, v, self.formula()?)
            }
            "existsrel" | "forallrel" => {
                let q = if head == "existsrel" {
                    Quantifier::Exists
                } else {
                    Quantifier::Forall
                };
                let rel = self.name("relation name")?;
                let arity = self.int::<usize>("arity")?;
                Formula::rel_quant(q, rel, arity, self.formula()?)
            }
            "existsrel-sub" | "forallrel-sub" => {
                let q = if head == "existsrel-sub" {
                    Quantifier::Exists
                } else {
                    Quantifier::Forall
                };
                let rel = self.name("relation name")?;
                let guard = self.name("guard relation name")?;
                Formula::guarded_quant(q, rel, guard, self.formula()?)
            }
            rel if is_name(rel) && !crate::logic::is_reserved_word(rel) => {
                let mut args = Vec::new();
                while *self.peek() != Tok::Close {
                    args.push(self.term()?);
                }
                Formula::Atom {
                    rel: rel.to_string(),
                    args,
                }
            }
            _ => {
                self.at -= 1;
                return self.fail("formula keyword or relation name");
            }
        };
        self.close()?;
        Ok(f)
    }

    fn sentence_block(&mut self) -> PResult<Formula> {
        self.open()?;
        self.keyword("sentence")?;
        let f = self.formula()?;
        self.close()?;
        Ok(f)
    }

    fn eof(&mut self) -> PResult<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.fail("end of input")
        }
    }
}

/// Parses `(vocab ...) (sentence ...)` and validates the result.
pub fn parse_class_spec(text: &str) -> Result<ClassSpec, TextError> {
    let mut p = Parser::new(text);
    let vocab = p.vocab()?;
    let sentence = p.sentence_block()?;
    p.eof()?;
    Ok(ClassSpec::new(vocab, sentence)?)
}

/// Parses a single formula, or a `(sentence ...)` block. No validation.
pub fn parse_formula(text: &str) -> Result<Formula, TextError> {
    let mut p = Parser::new(text);
    let wrapped = matches!(p.peek_at(1), Tok::Word(w) if w == "sentence");
    let f = if wrapped {
        p.sentence_block()?
    } else {
        p.formula()?
    };
    p.eof()?;
    Ok(f)
}

/// Parses a bare `(vocab ...)` block.
pub fn parse_vocabulary(text: &str) -> Result<Vocabulary, TextError> {
    let mut p = Parser::new(text);
    let v = p.vocab()?;
    p.eof()?;
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reflexivity_spec() {
        let spec =
            parse_class_spec("(vocab (rel E 2) (consts 0)) (sentence (forall x (E x x)))").unwrap();
        assert_eq!(spec.vocab(), &Vocabulary::from_pairs(&[("E", 2)], 0));
        assert_eq!(
            spec.sentence(),
            &Formula::forall("x", Formula::atom("E", ["x", "x"]))
        );
    }

    #[test]
    fn counting_node() {
        let f = parse_formula("(sentence (count 0 2 x (E x y)))").unwrap();
        assert_eq!(f, Formula::count(0, 2, "x", Formula::atom("E", ["x", "y"])));
    }

    #[test]
    fn unterminated_input_reports_end() {
        let err = parse_formula("(forall x").unwrap_err();
        match err {
            TextError::Syntax { found, pos, .. } => {
                assert_eq!(found, "end of input");
                assert_eq!(pos, Pos { line: 1, col: 10 });
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn positions_track_lines() {
        let err = parse_class_spec("(vocab (consts 0))\n(sentence (forall x (E x x))\n  extra")
            .unwrap_err();
        match err {
            TextError::Syntax { pos, .. } => assert_eq!(pos.line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn constants_nullary_and_comments() {
        let spec = parse_class_spec(
            "; a comment\n(vocab (rel Z 0) (rel U 1) (consts 2))\n(sentence (and (Z) (U a2)))",
        )
        .unwrap();
        assert_eq!(
            spec.sentence(),
            &Formula::and(
                Formula::atom("Z", Vec::<String>::new()),
                Formula::atom_terms("U", vec![Term::Const(2)])
            )
        );
    }

    #[test]
    fn validation_errors_are_delegated() {
        let err = parse_class_spec("(vocab (rel E 2) (consts 0)) (sentence (E x))").unwrap_err();
        assert!(matches!(err, TextError::Invalid(_)));
    }

    #[test]
    fn nary_and_nests_left() {
        let f = parse_formula("(and (true) (false) (true))").unwrap();
        assert_eq!(
            f,
            Formula::and(Formula::and(Formula::True, Formula::False), Formula::True)
        );
    }

    #[test]
    fn keyword_cannot_be_relation() {
        assert!(parse_formula("(vocab)").is_err());
    }
}
