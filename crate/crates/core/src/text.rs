use crate::model::Position;

/// Maps between byte offsets and 1-based line/column positions of one text.
/// Columns count `char`s, so multi-byte characters occupy one column.
#[derive(Debug, Clone)]
pub struct LineIndex {
    line_starts: Vec<usize>,
    len: usize,
}

impl LineIndex {
    pub fn new(text: &str) -> Self {
        let mut line_starts = vec![0];
        line_starts.extend(text.match_indices('\n').map(|(i, _)| i + 1));
        LineIndex { line_starts, len: text.len() }
    }

    pub fn line_count(&self) -> usize {
        self.line_starts.len()
    }

    pub fn position(&self, text: &str, offset: usize) -> Position {
        let offset = offset.min(self.len);
        let line = self.line_starts.partition_point(|&s| s <= offset) - 1;
        let column = text[self.line_starts[line]..offset].chars().count();
        Position::new(line as u32 + 1, column as u32 + 1)
    }

    /// Byte offset of `pos`, or `None` when it lies outside the text.
    /// The column one past the last character of a line is valid.
    pub fn offset(&self, text: &str, pos: Position) -> Option<usize> {
        let line = (pos.line as usize).checked_sub(1)?;
        let start = *self.line_starts.get(line)?;
        let end = self.line_starts.get(line + 1).map(|e| e - 1).unwrap_or(self.len);
        let line_text = &text[start..end];
        let col = (pos.column as usize).checked_sub(1)?;
        if col == 0 {
            return Some(start);
        }
        let mut chars = line_text.char_indices();
        match chars.nth(col) {
            Some((i, _)) => Some(start + i),
            None if line_text.chars().count() == col => Some(end),
            None => None,
        }
    }

    /// Position just past the end of the text.
    pub fn end_position(&self, text: &str) -> Position {
        self.position(text, self.len)
    }
}
