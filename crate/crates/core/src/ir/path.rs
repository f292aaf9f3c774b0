//! Path commands and the `d` attribute grammar.

use std::fmt;

use super::ParseError;

/// The ten SVG path operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CommandKind {
    MoveTo,
    LineTo,
    HorizontalTo,
    VerticalTo,
    CubicTo,
    SmoothCubicTo,
    QuadTo,
    SmoothQuadTo,
    ArcTo,
    Close,
}

impl CommandKind {
    pub const ALL: [CommandKind; 10] = [
        CommandKind::MoveTo,
        CommandKind::LineTo,
        CommandKind::HorizontalTo,
        CommandKind::VerticalTo,
        CommandKind::CubicTo,
        CommandKind::SmoothCubicTo,
        CommandKind::QuadTo,
        CommandKind::SmoothQuadTo,
        CommandKind::ArcTo,
        CommandKind::Close,
    ];

    /// Number of numeric parameters, not counting arc flags.
    pub fn numeric_arity(self) -> usize {
        match self {
            CommandKind::MoveTo | CommandKind::LineTo | CommandKind::SmoothQuadTo => 2,
            CommandKind::HorizontalTo | CommandKind::VerticalTo => 1,
            CommandKind::CubicTo => 6,
            CommandKind::SmoothCubicTo | CommandKind::QuadTo => 4,
            CommandKind::ArcTo => 5,
            CommandKind::Close => 0,
        }
    }

    /// Total parameter slots in token form (arcs carry two extra flag slots).
    pub fn token_arity(self) -> usize {
        match self {
            CommandKind::ArcTo => 7,
            other => other.numeric_arity(),
        }
    }

    /// Upper-case SVG letter.
    pub fn letter(self) -> char {
        match self {
            CommandKind::MoveTo => 'M',
            CommandKind::LineTo => 'L',
            CommandKind::HorizontalTo => 'H',
            CommandKind::VerticalTo => 'V',
            CommandKind::CubicTo => 'C',
            CommandKind::SmoothCubicTo => 'S',
            CommandKind::QuadTo => 'Q',
            CommandKind::SmoothQuadTo => 'T',
            CommandKind::ArcTo => 'A',
            CommandKind::Close => 'Z',
        }
    }

    /// Maps a path letter of either case to `(kind, relative)`.
    pub fn from_letter(c: char) -> Option<(CommandKind, bool)> {
        let kind = match c.to_ascii_uppercase() {
            'M' => CommandKind::MoveTo,
            'L' => CommandKind::LineTo,
            'H' => CommandKind::HorizontalTo,
            'V' => CommandKind::VerticalTo,
            'C' => CommandKind::CubicTo,
            'S' => CommandKind::SmoothCubicTo,
            'Q' => CommandKind::QuadTo,
            'T' => CommandKind::SmoothQuadTo,
            'A' => CommandKind::ArcTo,
            'Z' => CommandKind::Close,
            _ => return None,
        };
        Some((kind, c.is_ascii_lowercase()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ArcFlags {
    pub large_arc: bool,
    pub sweep: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{letter} expects {expected} numeric parameters{flags}, got {got}", flags = if *.needs_flags { " and two flags" } else { "" })]
pub struct ArityError {
    pub letter: char,
    pub expected: usize,
    pub got: usize,
    pub needs_flags: bool,
}

/// One path command with its parameters.
///
/// For arcs, `params` holds `rx ry x-axis-rotation x y` and the two flags live
/// separately; token order puts the flags between rotation and endpoint.
#[derive(Clone, Debug, PartialEq)]
pub struct PathCommand {
    kind: CommandKind,
    relative: bool,
    params: Vec<f64>,
    flags: Option<ArcFlags>,
}

impl PathCommand {
    pub fn new(
        kind: CommandKind,
        relative: bool,
        params: Vec<f64>,
        flags: Option<ArcFlags>,
    ) -> Result<Self, ArityError> {
        let is_arc = kind == CommandKind::ArcTo;
        if params.len() != kind.numeric_arity() || flags.is_some() != is_arc {
            return Err(ArityError {
                letter: letter_for(kind, relative),
                expected: kind.numeric_arity(),
                got: params.len(),
                needs_flags: is_arc,
            });
        }
        Ok(Self { kind, relative, params, flags })
    }

    pub fn move_to(relative: bool, x: f64, y: f64) -> Self {
        Self::new(CommandKind::MoveTo, relative, vec![x, y], None).unwrap()
    }

    pub fn line_to(relative: bool, x: f64, y: f64) -> Self {
        Self::new(CommandKind::LineTo, relative, vec![x, y], None).unwrap()
    }

    pub fn close(relative: bool) -> Self {
        Self::new(CommandKind::Close, relative, Vec::new(), None).unwrap()
    }

    #[allow(clippy::too_many_arguments)]
    pub fn arc_to(
        relative: bool,
        rx: f64,
        ry: f64,
        rotation: f64,
        large_arc: bool,
        sweep: bool,
        x: f64,
        y: f64,
    ) -> Self {
        Self::new(
            CommandKind::ArcTo,
            relative,
            vec![rx, ry, rotation, x, y],
            Some(ArcFlags { large_arc, sweep }),
        )
        .unwrap()
    }

    pub fn kind(&self) -> CommandKind {
        self.kind
    }

    pub fn is_relative(&self) -> bool {
        self.relative
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn flags(&self) -> Option<ArcFlags> {
        self.flags
    }

    pub fn letter(&self) -> char {
        letter_for(self.kind, self.relative)
    }

    /// Same command with every numeric parameter passed through `f`.
    pub fn map_params(&self, mut f: impl FnMut(usize, f64) -> f64) -> Self {
        Self {
            params: self.params.iter().enumerate().map(|(i, &v)| f(i, v)).collect(),
            ..self.clone()
        }
    }

    pub(crate) fn with_params(kind: CommandKind, relative: bool, params: Vec<f64>, flags: Option<ArcFlags>) -> Self {
        debug_assert!(params.len() == kind.numeric_arity());
        Self { kind, relative, params, flags }
    }
}

fn letter_for(kind: CommandKind, relative: bool) -> char {
    if relative {
        kind.letter().to_ascii_lowercase()
    } else {
        kind.letter()
    }
}

/// Formats a number the way the serializer writes it: shortest round-trip
/// decimal, never `-0`.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v}")
    }
}

impl fmt::Display for PathCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())?;
        for (i, v) in self.params.iter().enumerate() {
            if i == 3 {
                if let Some(fl) = self.flags {
                    write!(f, " {} {}", fl.large_arc as u8, fl.sweep as u8)?;
                }
            }
            write!(f, " {}", format_number(*v))?;
        }
        Ok(())
    }
}

/// Longhand, space-separated path data.
pub fn write_path_data(cmds: &[PathCommand]) -> String {
    cmds.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ")
}

/// Parses a `d` attribute, expanding implicit command repetition.
pub fn parse_path_data(d: &str) -> Result<Vec<PathCommand>, ParseError> {
    let mut lexer = Lexer { s: d.as_bytes(), pos: 0 };
    let mut out = Vec::new();
    let mut current: Option<(CommandKind, bool)> = None;

    loop {
        lexer.skip_separators();
        if lexer.at_end() {
            break;
        }
        let c = lexer.peek() as char;
        let (kind, relative) = if let Some(cmd) = CommandKind::from_letter(c) {
            lexer.pos += 1;
            cmd
        } else if let Some(prev) = current {
            if prev.0 == CommandKind::Close {
                return Err(bad(d, "parameters after closepath"));
            }
            // implicit repetition; moveto continues as lineto
            match prev.0 {
                CommandKind::MoveTo => (CommandKind::LineTo, prev.1),
                _ => prev,
            }
        } else {
            return Err(bad(d, "path data must begin with a command"));
        };

        if out.is_empty() && kind != CommandKind::MoveTo {
            return Err(bad(d, "path data must begin with moveto"));
        }

        let mut params = Vec::with_capacity(kind.numeric_arity());
        let mut flags = None;
        for slot in 0..kind.token_arity() {
            lexer.skip_separators();
            if kind == CommandKind::ArcTo && (slot == 3 || slot == 4) {
                let flag = lexer.flag().ok_or_else(|| {
                    bad(d, &format!("{} expects a 0/1 flag", letter_for(kind, relative)))
                })?;
                let fl = flags.get_or_insert(ArcFlags { large_arc: false, sweep: false });
                if slot == 3 {
                    fl.large_arc = flag;
                } else {
                    fl.sweep = flag;
                }
                continue;
            }
            match lexer.number() {
                Some(Ok(v)) => params.push(v),
                Some(Err(msg)) => return Err(bad(d, &msg)),
                None => {
                    return Err(bad(
                        d,
                        &format!(
                            "{} expects {} parameters, got {}",
                            letter_for(kind, relative),
                            kind.token_arity(),
                            slot
                        ),
                    ))
                }
            }
        }
        let cmd = PathCommand::new(kind, relative, params, flags).map_err(|e| bad(d, &e.to_string()))?;
        out.push(cmd);
        current = Some((kind, relative));
    }
    Ok(out)
}

fn bad(d: &str, msg: &str) -> ParseError {
    let mut snippet: String = d.chars().take(40).collect();
    if d.chars().count() > 40 {
        snippet.push('…');
    }
    ParseError::BadPathData(format!("{msg} in \"{snippet}\""))
}

struct Lexer<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Lexer<'_> {
    fn at_end(&self) -> bool {
        self.pos >= self.s.len()
    }

    fn peek(&self) -> u8 {
        self.s[self.pos]
    }

    fn skip_separators(&mut self) {
        let mut seen_comma = false;
        while !self.at_end() {
            match self.peek() {
                b' ' | b'\t' | b'\n' | b'\r' | b'\x0C' => self.pos += 1,
                b',' if !seen_comma => {
                    seen_comma = true;
                    self.pos += 1
                }
                _ => break,
            }
        }
    }

    fn flag(&mut self) -> Option<bool> {
        match self.s.get(self.pos) {
            Some(b'0') => {
                self.pos += 1;
                Some(false)
            }
            Some(b'1') => {
                self.pos += 1;
                Some(true)
            }
            _ => None,
        }
    }

    /// `None` when no number starts here, `Some(Err)` on a malformed one.
    fn number(&mut self) -> Option<Result<f64, String>> {
        let start = self.pos;
        let s = self.s;
        let mut i = self.pos;
        if i < s.len() && (s[i] == b'+' || s[i] == b'-') {
            i += 1;
        }
        let int_start = i;
        while i < s.len() && s[i].is_ascii_digit() {
            i += 1;
        }
        let mut digits = i - int_start;
        if i < s.len() && s[i] == b'.' {
            i += 1;
            let frac_start = i;
            while i < s.len() && s[i].is_ascii_digit() {
                i += 1;
            }
            digits += i - frac_start;
        }
        if digits == 0 {
            return None;
        }
        if i < s.len() && (s[i] == b'e' || s[i] == b'E') {
            let mut j = i + 1;
            if j < s.len() && (s[j] == b'+' || s[j] == b'-') {
                j += 1;
            }
            let exp_start = j;
            while j < s.len() && s[j].is_ascii_digit() {
                j += 1;
            }
            if j > exp_start {
                i = j;
            }
        }
        // CSS units or other trailing junk glued to the number
        if i < s.len() && (s[i].is_ascii_alphabetic() && CommandKind::from_letter(s[i] as char).is_none() || s[i] == b'%') {
            return Some(Err(format!(
                "unit or junk after number at byte {}",
                i
            )));
        }
        self.pos = i;
        let text = std::str::from_utf8(&s[start..i]).expect("ascii");
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Some(Ok(v)),
            _ => Some(Err(format!("bad number {text:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn letters(cmds: &[PathCommand]) -> String {
        cmds.iter().map(|c| c.letter()).collect()
    }

    #[test]
    fn implicit_repetition() {
        let cmds = parse_path_data("M 0 0 L 1 1 2 2").unwrap();
        assert_eq!(letters(&cmds), "MLL");
        assert_eq!(cmds[2].params(), &[2.0, 2.0]);

        let cmds = parse_path_data("m1 2 3 4 5 6").unwrap();
        assert_eq!(letters(&cmds), "mll");
    }

    #[test]
    fn compact_syntax() {
        let cmds = parse_path_data("M8.5 5.5a.5.5 0 0 0-1 0v3.362l-1.429 2.38z").unwrap();
        assert_eq!(letters(&cmds), "Mavlz");
        assert_eq!(cmds[1].params(), &[0.5, 0.5, 0.0, -1.0, 0.0]);
        assert_eq!(cmds[1].flags(), Some(ArcFlags { large_arc: false, sweep: false }));

        // flags glued to each other and to the next number
        let cmds = parse_path_data("M0,0A5,5,0,1110,10").unwrap();
        assert_eq!(cmds[1].flags(), Some(ArcFlags { large_arc: true, sweep: true }));
        assert_eq!(cmds[1].params(), &[5.0, 5.0, 0.0, 10.0, 10.0]);

        let cmds = parse_path_data("M1e2-3.5E-1L.5.5").unwrap();
        assert_eq!(cmds[0].params(), &[100.0, -0.35]);
        assert_eq!(cmds[1].params(), &[0.5, 0.5]);
    }

    #[test]
    fn arity_violations() {
        assert!(matches!(parse_path_data("M 1"), Err(ParseError::BadPathData(_))));
        assert!(matches!(parse_path_data("M 0 0 C 1 2 3"), Err(ParseError::BadPathData(_))));
        assert!(matches!(parse_path_data("M 0 0 Z 1"), Err(ParseError::BadPathData(_))));
        assert!(matches!(parse_path_data("L 0 0"), Err(ParseError::BadPathData(_))));
        assert!(matches!(parse_path_data("M0 0A5 5 0 2 0 1 1"), Err(ParseError::BadPathData(_))));
    }

    #[test]
    fn units_rejected() {
        assert!(matches!(parse_path_data("M 10px 0"), Err(ParseError::BadPathData(_))));
        assert!(matches!(parse_path_data("M 10% 0"), Err(ParseError::BadPathData(_))));
    }

    #[test]
    fn empty_data_is_empty_path() {
        assert!(parse_path_data("").unwrap().is_empty());
        assert!(parse_path_data("  \n").unwrap().is_empty());
    }

    #[test]
    fn longhand_output() {
        let cmds = parse_path_data("M1,2z").unwrap();
        assert_eq!(write_path_data(&cmds), "M 1 2 z");
        let cmds = parse_path_data("M0 0a5 6 30 1 0 7 8").unwrap();
        assert_eq!(write_path_data(&cmds), "M 0 0 a 5 6 30 1 0 7 8");
        assert_eq!(format_number(-0.0), "0");
        assert_eq!(format_number(0.1), "0.1");
    }

    #[test]
    fn constructor_enforces_arity() {
        assert!(PathCommand::new(CommandKind::LineTo, false, vec![1.0], None).is_err());
        assert!(PathCommand::new(CommandKind::ArcTo, false, vec![1.0; 5], None).is_err());
        assert!(PathCommand::new(
            CommandKind::LineTo,
            false,
            vec![1.0, 2.0],
            Some(ArcFlags { large_arc: false, sweep: false })
        )
        .is_err());
        assert!(PathCommand::new(CommandKind::Close, true, vec![], None).is_ok());
    }
}
