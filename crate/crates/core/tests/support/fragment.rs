//! Brace-matching oracle for code-fragment selections.

use refann_core::{Position, TextRange};

/// Char offsets of each line start, mirroring `split('\n')`.
pub struct Offsets {
    chars: Vec<char>,
    starts: Vec<usize>,
}

impl Offsets {
    pub fn new(text: &str) -> Self {
        let chars: Vec<char> = text.chars().collect();
        let mut starts = vec![0];
        starts.extend(chars.iter().enumerate().filter(|(_, c)| **c == '\n').map(|(i, _)| i + 1));
        Offsets { chars, starts }
    }

    pub fn line_len(&self, line: usize) -> Option<usize> {
        let start = *self.starts.get(line - 1)?;
        let end = self.starts.get(line).map(|s| s - 1).unwrap_or(self.chars.len());
        Some(end - start)
    }

    pub fn offset(&self, p: Position) -> Option<usize> {
        let line = p.line as usize;
        if line == 0 || p.column == 0 {
            return None;
        }
        let len = self.line_len(line)?;
        let col = p.column as usize - 1;
        (col <= len).then(|| self.starts[line - 1] + col)
    }

    pub fn position(&self, offset: usize) -> Position {
        let line = self.starts.partition_point(|&s| s <= offset);
        Position::new(line as u32, (offset - self.starts[line - 1]) as u32 + 1)
    }

    pub fn char_at(&self, offset: usize) -> char {
        self.chars[offset]
    }

    pub fn len(&self) -> usize {
        self.chars.len()
    }

    pub fn line_count(&self) -> usize {
        self.starts.len()
    }
}

pub struct MethodSpan {
    pub start: usize,
    pub end: usize,
    /// Interior of the body between its braces, if the method has one.
    pub interior: Option<(usize, usize)>,
}

/// Method spans from hand-enumerated method ranges. A method has a body iff
/// its text ends with `}`; the body opens at the first `{` of the method.
pub fn method_spans(offsets: &Offsets, methods: &[TextRange]) -> Vec<MethodSpan> {
    methods
        .iter()
        .map(|m| {
            let start = offsets.offset(m.start()).unwrap();
            let end = offsets.offset(m.end()).unwrap();
            let interior = (offsets.char_at(end - 1) == '}').then(|| {
                let open = (start..end).find(|&i| offsets.char_at(i) == '{').unwrap();
                (open + 1, end - 1)
            });
            MethodSpan { start, end, interior }
        })
        .collect()
}

/// The range a code-fragment selection should be stored as, or `None` when it must be rejected.
pub fn expected_fragment(offsets: &Offsets, spans: &[MethodSpan], range: &TextRange) -> Option<TextRange> {
    let mut s = offsets.offset(range.start())?;
    let mut e = offsets.offset(range.end())?;
    let ws = |c: char| matches!(c, ' ' | '\t' | '\n' | '\r');
    while s < e && ws(offsets.char_at(s)) {
        s += 1;
    }
    while e > s && ws(offsets.char_at(e - 1)) {
        e -= 1;
    }
    if s == e {
        return None;
    }
    let cuts = spans.iter().any(|m| {
        let overlap = m.start < e && s < m.end;
        let m_holds = m.start <= s && e <= m.end;
        let r_holds = s <= m.start && m.end <= e;
        overlap && !m_holds && !r_holds
    });
    if cuts {
        return None;
    }
    let inside = spans.iter().filter_map(|m| m.interior).any(|(a, b)| a <= s && e <= b);
    inside.then(|| TextRange::new(range.path(), offsets.position(s), offsets.position(e)).unwrap())
}
