use std::fmt;

use super::SyntaxError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Str(String),
    Num(f64),
    Fetch,
    And,
    In,
    Arrow,
    Lambda,
    Assign,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Star,
    Eq,
    Gt,
    Lt,
    /// Statement separator: `;` or a line break that ends a statement.
    Sep,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier '{s}'"),
            Tok::Str(_) => "string".into(),
            Tok::Num(n) => format!("number {n}"),
            Tok::Sep => "end of statement".into(),
            Tok::Eof => "end of input".into(),
            other => format!("'{}'", other.symbol()),
        }
    }

    pub fn symbol(&self) -> &'static str {
        match self {
            Tok::Fetch => "fetch",
            Tok::And => "and",
            Tok::In => "in",
            Tok::Arrow => "->",
            Tok::Lambda => "\\",
            Tok::Assign => ":=",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Comma => ",",
            Tok::Colon => ":",
            Tok::Star => "*",
            Tok::Eq => "=",
            Tok::Gt => ">",
            Tok::Lt => "<",
            Tok::Sep => ";",
            Tok::Ident(_) => "identifier",
            Tok::Str(_) => "string",
            Tok::Num(_) => "number",
            Tok::Eof => "end of input",
        }
    }

    /// A line break after one of these never ends the statement.
    fn continues(&self) -> bool {
        matches!(
            self,
            Tok::Arrow
                | Tok::Lambda
                | Tok::Assign
                | Tok::Comma
                | Tok::Colon
                | Tok::Star
                | Tok::Eq
                | Tok::Gt
                | Tok::Lt
                | Tok::And
                | Tok::In
                | Tok::Sep
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

struct Lexer {
    chars: Vec<char>,
    i: usize,
    pos: Pos,
    depth: usize,
    out: Vec<Token>,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let mut lx = Lexer {
        chars: src.chars().collect(),
        i: 0,
        pos: Pos { line: 1, column: 1 },
        depth: 0,
        out: Vec::new(),
    };
    lx.run()?;
    let pos = lx.pos;
    lx.out.push(Token { tok: Tok::Eof, pos });
    Ok(lx.out)
}

impl Lexer {
    fn peek(&self, k: usize) -> Option<char> {
        self.chars.get(self.i + k).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek(0)?;
        self.i += 1;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.column = 1;
        } else {
            self.pos.column += 1;
        }
        Some(c)
    }

    fn push(&mut self, tok: Tok, pos: Pos) {
        match tok {
            Tok::LParen | Tok::LBracket | Tok::LBrace => self.depth += 1,
            Tok::RParen | Tok::RBracket | Tok::RBrace => self.depth = self.depth.saturating_sub(1),
            _ => {}
        }
        self.out.push(Token { tok, pos });
    }

    /// True when the next non-blank line starts in column 1.
    fn next_line_flush(&self) -> bool {
        let mut k = self.i + 1;
        loop {
            match self.chars.get(k) {
                None => return false,
                Some('\n') | Some('\r') => k += 1,
                Some(c) if c.is_whitespace() => {
                    // indented, unless the whole line is blank
                    let rest = self.chars[k..].iter().take_while(|c| **c != '\n');
                    if rest.clone().all(|c| c.is_whitespace()) {
                        k += rest.count();
                    } else {
                        return false;
                    }
                }
                Some(_) => return true,
            }
        }
    }

    fn run(&mut self) -> Result<(), SyntaxError> {
        while let Some(c) = self.peek(0) {
            let start = self.pos;
            match c {
                '\n' => {
                    let ends = self.depth == 0
                        && self.out.last().is_some_and(|t| !t.tok.continues())
                        && self.next_line_flush();
                    if ends {
                        self.push(Tok::Sep, start);
                    }
                    self.bump();
                }
                c if c.is_whitespace() => {
                    self.bump();
                }
                '#' => {
                    while self.peek(0).is_some_and(|c| c != '\n') {
                        self.bump();
                    }
                }
                '-' if self.peek(1) == Some('>') => {
                    self.bump();
                    self.bump();
                    self.push(Tok::Arrow, start);
                }
                '→' => {
                    self.bump();
                    self.push(Tok::Arrow, start);
                }
                'λ' | '\\' => {
                    self.bump();
                    self.push(Tok::Lambda, start);
                }
                ':' if self.peek(1) == Some('=') => {
                    self.bump();
                    self.bump();
                    self.push(Tok::Assign, start);
                }
                '\'' | '`' | '‘' | '"' | '“' => {
                    let s = self.string(c, start)?;
                    self.push(Tok::Str(s), start);
                }
                c if c.is_ascii_digit() => {
                    let n = self.number();
                    self.push(Tok::Num(n), start);
                }
                c if c.is_alphabetic() || c == '_' => {
                    let mut word = String::new();
                    while let Some(c) = self.peek(0).filter(|c| (c.is_alphanumeric() || *c == '_') && *c != 'λ') {
                        word.push(c);
                        self.bump();
                    }
                    let tok = match word.as_str() {
                        "fetch" => Tok::Fetch,
                        "and" => Tok::And,
                        "in" => Tok::In,
                        _ => Tok::Ident(word),
                    };
                    self.push(tok, start);
                }
                _ => {
                    let tok = match c {
                        '(' => Tok::LParen,
                        ')' => Tok::RParen,
                        '[' => Tok::LBracket,
                        ']' => Tok::RBracket,
                        '{' => Tok::LBrace,
                        '}' => Tok::RBrace,
                        ',' => Tok::Comma,
                        ':' => Tok::Colon,
                        '*' => Tok::Star,
                        '=' => Tok::Eq,
                        '>' => Tok::Gt,
                        '<' => Tok::Lt,
                        ';' => Tok::Sep,
                        other => {
                            return Err(SyntaxError::new(
                                start,
                                format!("unexpected character {other:?}"),
                                Vec::new(),
                            ))
                        }
                    };
                    self.bump();
                    self.push(tok, start);
                }
            }
        }
        Ok(())
    }

    fn number(&mut self) -> f64 {
        let mut text = String::new();
        while let Some(c) = self.peek(0).filter(char::is_ascii_digit) {
            text.push(c);
            self.bump();
        }
        if self.peek(0) == Some('.') && self.peek(1).is_some_and(|c| c.is_ascii_digit()) {
            text.push('.');
            self.bump();
            while let Some(c) = self.peek(0).filter(char::is_ascii_digit) {
                text.push(c);
                self.bump();
            }
        }
        text.parse().expect("digits form a valid number")
    }

    /// Quoted string. `'x'`, `"x"`, and the typeset forms `` `x' `` and
    /// `‘x’` all produce the same literal.
    fn string(&mut self, open: char, start: Pos) -> Result<String, SyntaxError> {
        let closers: &[char] = match open {
            '"' => &['"'],
            '“' => &['”'],
            _ => &['\'', '’'],
        };
        self.bump();
        let mut s = String::new();
        loop {
            match self.bump() {
                None => {
                    return Err(SyntaxError::new(
                        start,
                        "unterminated string".into(),
                        vec![format!("'{}'", closers[0])],
                    ))
                }
                Some('\\') => match self.bump() {
                    Some(c) => s.push(c),
                    None => {
                        return Err(SyntaxError::new(start, "unterminated string".into(), Vec::new()));
                    }
                },
                Some(c) if closers.contains(&c) => return Ok(s),
                Some(c) => s.push(c),
            }
        }
    }
}
