//! Applies computed hunks to a text, the inverse the library does not ship.

use refann_core::diff::{FileDiff, LineTag, TextShape};

fn split<'a>(text: &'a str, shape: &TextShape) -> Vec<&'a str> {
    if text.is_empty() {
        return Vec::new();
    }
    let sep = shape.line_ending.as_str();
    let body = if shape.trailing_newline { text.strip_suffix(sep).expect("shape says trailing newline") } else { text };
    body.split(sep).collect()
}

fn join(lines: &[String], shape: &TextShape) -> String {
    let sep = shape.line_ending.as_str();
    let mut out = lines.join(sep);
    if shape.trailing_newline {
        out.push_str(sep);
    }
    out
}

/// Rebuilds the after text from the before text and the hunks, checking every
/// context and deleted line against the before text.
pub fn apply(before: &str, diff: &FileDiff) -> Result<String, String> {
    let old = split(before, &diff.before_shape);
    if join(&old.iter().map(|s| s.to_string()).collect::<Vec<_>>(), &diff.before_shape) != before {
        return Err("before shape does not reproduce the before text".into());
    }
    let mut out: Vec<String> = Vec::new();
    let mut pos = 0usize;
    for hunk in &diff.hunks {
        let start = hunk.before_start.saturating_sub(1);
        if start < pos {
            return Err(format!("hunk at {} overlaps the previous one", hunk.before_start));
        }
        out.extend(old[pos..start].iter().map(|s| s.to_string()));
        pos = start;
        let (mut seen_before, mut seen_after) = (0, 0);
        for line in &hunk.lines {
            match line.tag {
                LineTag::Context | LineTag::Delete => {
                    if old.get(pos) != Some(&line.text.as_str()) {
                        return Err(format!("line {} does not match {:?}", pos + 1, line.text));
                    }
                    if line.tag == LineTag::Context {
                        out.push(line.text.clone());
                        seen_after += 1;
                    }
                    pos += 1;
                    seen_before += 1;
                }
                LineTag::Insert => {
                    out.push(line.text.clone());
                    seen_after += 1;
                }
            }
        }
        if seen_before != hunk.before_len || seen_after != hunk.after_len {
            return Err(format!("hunk header at {} disagrees with its lines", hunk.before_start));
        }
    }
    out.extend(old[pos..].iter().map(|s| s.to_string()));
    Ok(join(&out, &diff.after_shape))
}
