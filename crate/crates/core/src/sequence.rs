//! Sequences over symbolic or low-dimensional real alphabets.
//!
//! Public span arithmetic is 1-based and inclusive on both ends, so `Span { start: 1, end: 4 }`
//! names the first four elements of a sequence.

use std::fmt;
use std::ops::Range;

use thiserror::Error;

/// Largest supported vector dimension.
pub const MAX_DIM: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SequenceError {
    #[error("element kind mismatch: {left} vs {right}")]
    KindMismatch { left: Alphabet, right: Alphabet },
    #[error("vector dimension {0} is not supported (1..={MAX_DIM})")]
    UnsupportedDimension(usize),
    #[error("non-finite coordinate in element {index}")]
    NonFinite { index: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Kind of elements a sequence is made of.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Alphabet {
    Symbols,
    Vectors(u8),
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alphabet::Symbols => write!(f, "symbols"),
            Alphabet::Vectors(d) => write!(f, "vectors({d})"),
        }
    }
}

/// A point with 1 to 3 finite coordinates. Unused trailing coordinates are zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    coords: [f64; MAX_DIM],
    dim: u8,
}

impl Point {
    pub fn new(coords: &[f64]) -> Result<Self, SequenceError> {
        if coords.is_empty() || coords.len() > MAX_DIM {
            return Err(SequenceError::UnsupportedDimension(coords.len()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(SequenceError::NonFinite { index: 0 });
        }
        let mut buf = [0.0; MAX_DIM];
        buf[..coords.len()].copy_from_slice(coords);
        Ok(Point { coords: buf, dim: coords.len() as u8 })
    }

    pub fn origin(dim: usize) -> Result<Self, SequenceError> {
        if dim == 0 || dim > MAX_DIM {
            return Err(SequenceError::UnsupportedDimension(dim));
        }
        Ok(Point { coords: [0.0; MAX_DIM], dim: dim as u8 })
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.dim as usize]
    }
}

/// One sequence element.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Element {
    Symbol(char),
    Vector(Point),
}

impl Element {
    pub fn scalar(v: f64) -> Self {
        Element::Vector(Point { coords: [v, 0.0, 0.0], dim: 1 })
    }

    pub fn alphabet(&self) -> Alphabet {
        match self {
            Element::Symbol(_) => Alphabet::Symbols,
            Element::Vector(p) => Alphabet::Vectors(p.dim),
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Symbol(c) => write!(f, "{c}"),
            Element::Vector(p) => {
                write!(f, "(")?;
                for (i, c) in p.coords().iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Ground distance between two elements: 0/1 for symbols, Euclidean norm for vectors.
pub fn element_distance(a: &Element, b: &Element) -> Result<f64, SequenceError> {
    if a.alphabet() != b.alphabet() {
        return Err(SequenceError::KindMismatch { left: a.alphabet(), right: b.alphabet() });
    }
    Ok(ground(a, b))
}

/// Unchecked ground distance. Callers must have verified both elements share an alphabet.
#[inline]
pub(crate) fn ground(a: &Element, b: &Element) -> f64 {
    match (a, b) {
        (Element::Symbol(x), Element::Symbol(y)) => {
            if x == y {
                0.0
            } else {
                1.0
            }
        }
        (Element::Vector(p), Element::Vector(q)) => match p.dim {
            1 => (p.coords[0] - q.coords[0]).abs(),
            _ => {
                let mut s = 0.0;
                for k in 0..p.dim as usize {
                    let d = p.coords[k] - q.coords[k];
                    s += d * d;
                }
                s.sqrt()
            }
        },
        _ => {
            debug_assert!(false, "ground distance across element kinds");
            f64::NAN
        }
    }
}

/// A 1-based inclusive span `start..=end`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start >= 1 && start <= end, "invalid span {start}..={end}");
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Zero-based half-open range for slicing.
    pub fn range(&self) -> Range<usize> {
        self.start - 1..self.end
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..={}", self.start, self.end)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sequence {
    id: String,
    alphabet: Alphabet,
    elements: Vec<Element>,
}

impl Sequence {
    /// Builds a sequence, checking that every element belongs to `alphabet`.
    pub fn new(
        id: impl Into<String>,
        alphabet: Alphabet,
        elements: Vec<Element>,
    ) -> Result<Self, SequenceError> {
        if let Alphabet::Vectors(d) = alphabet {
            if d == 0 || d as usize > MAX_DIM {
                return Err(SequenceError::UnsupportedDimension(d as usize));
            }
        }
        for (index, e) in elements.iter().enumerate() {
            if e.alphabet() != alphabet {
                return Err(SequenceError::KindMismatch { left: alphabet, right: e.alphabet() });
            }
            if let Element::Vector(p) = e {
                if p.coords().iter().any(|c| !c.is_finite()) {
                    return Err(SequenceError::NonFinite { index });
                }
            }
        }
        Ok(Sequence { id: id.into(), alphabet, elements })
    }

    pub fn symbols(id: impl Into<String>, text: &str) -> Self {
        Sequence {
            id: id.into(),
            alphabet: Alphabet::Symbols,
            elements: text.chars().map(Element::Symbol).collect(),
        }
    }

    /// One-dimensional series. Panics on non-finite values.
    pub fn scalars(id: impl Into<String>, values: &[f64]) -> Self {
        assert!(values.iter().all(|v| v.is_finite()), "non-finite scalar");
        Sequence {
            id: id.into(),
            alphabet: Alphabet::Vectors(1),
            elements: values.iter().map(|&v| Element::scalar(v)).collect(),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Elements covered by a 1-based span.
    pub fn slice(&self, span: Span) -> &[Element] {
        &self.elements[span.range()]
    }
}

/// A collection of sequences sharing one alphabet.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    alphabet: Alphabet,
    sequences: Vec<Sequence>,
}

impl Dataset {
    pub fn new(alphabet: Alphabet, sequences: Vec<Sequence>) -> Result<Self, SequenceError> {
        for s in &sequences {
            if s.alphabet != alphabet {
                return Err(SequenceError::KindMismatch { left: alphabet, right: s.alphabet });
            }
        }
        Ok(Dataset { alphabet, sequences })
    }

    pub fn empty(alphabet: Alphabet) -> Self {
        Dataset { alphabet, sequences: Vec::new() }
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn sequences(&self) -> &[Sequence] {
        &self.sequences
    }

    pub fn get(&self, index: usize) -> Option<&Sequence> {
        self.sequences.get(index)
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    pub fn total_elements(&self) -> usize {
        self.sequences.iter().map(Sequence::len).sum()
    }
}

/// Parses strings given either as FASTA (headers start with `>`) or one sequence per line.
///
/// In line mode sequences are named by their 0-based ordinal among non-blank lines.
pub fn parse_string_dataset(text: &str) -> Result<Dataset, SequenceError> {
    let mut lines = text
        .split('\n')
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l).trim()));
    let fasta = lines.clone().find(|(_, l)| !l.is_empty()).is_some_and(|(_, l)| l.starts_with('>'));

    let check = |line: usize, body: &str| -> Result<(), SequenceError> {
        match body.chars().find(|c| c.is_control()) {
            Some(c) => Err(SequenceError::Parse {
                line,
                message: format!("control character U+{:04X}", c as u32),
            }),
            None => Ok(()),
        }
    };

    let mut sequences = Vec::new();
    if fasta {
        let mut current: Option<(String, String)> = None;
        for (no, line) in lines.by_ref() {
            if line.is_empty() {
                continue;
            }
            check(no, line)?;
            if let Some(header) = line.strip_prefix('>') {
                if let Some((id, body)) = current.take() {
                    sequences.push(Sequence::symbols(id, &body));
                }
                current = Some((header.trim().to_string(), String::new()));
            } else if let Some((_, body)) = current.as_mut() {
                body.push_str(line);
            }
        }
        if let Some((id, body)) = current {
            sequences.push(Sequence::symbols(id, &body));
        }
    } else {
        for (no, line) in lines {
            if line.is_empty() {
                continue;
            }
            check(no, line)?;
            sequences.push(Sequence::symbols(sequences.len().to_string(), line));
        }
    }
    Ok(Dataset { alphabet: Alphabet::Symbols, sequences })
}

/// Parses `seq_id,v1[,v2[,v3]]` rows; rows of one sequence must be consecutive.
pub fn parse_timeseries_dataset(text: &str, dims: usize) -> Result<Dataset, SequenceError> {
    if dims == 0 || dims > MAX_DIM {
        return Err(SequenceError::UnsupportedDimension(dims));
    }
    let alphabet = Alphabet::Vectors(dims as u8);
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut sequences: Vec<Sequence> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut record = csv::StringRecord::new();
    loop {
        let more = reader.read_record(&mut record).map_err(|e| SequenceError::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        if !more {
            break;
        }
        let line = record.position().map_or(0, |p| p.line() as usize);
        let err = |message: String| SequenceError::Parse { line, message };
        if record.len() != dims + 1 {
            return Err(err(format!("expected {} columns, found {}", dims + 1, record.len())));
        }
        let mut coords = [0.0; MAX_DIM];
        for (k, field) in record.iter().skip(1).enumerate() {
            let v: f64 = field.parse().map_err(|_| err(format!("non-numeric value {field:?}")))?;
            if !v.is_finite() {
                return Err(err(format!("non-finite value {field:?}")));
            }
            coords[k] = v;
        }
        let element = Element::Vector(Point::new(&coords[..dims])?);
        let id = &record[0];
        match sequences.last_mut() {
            Some(s) if s.id == id => s.elements.push(element),
            _ => {
                if !seen.insert(id.to_string()) {
                    return Err(err(format!("rows of sequence {id:?} are not consecutive")));
                }
                sequences.push(Sequence { id: id.to_string(), alphabet, elements: vec![element] });
            }
        }
    }
    Ok(Dataset { alphabet, sequences })
}

/// Writes a dataset in the format its alphabet parses from: FASTA for strings, CSV rows for
/// vectors. Vector sequences with no elements have no CSV representation and are skipped.
pub fn serialize_dataset(ds: &Dataset) -> String {
    match ds.alphabet {
        Alphabet::Symbols => {
            let mut out = String::new();
            for s in &ds.sequences {
                out.push('>');
                out.push_str(&s.id);
                out.push('\n');
                out.extend(s.elements.iter().map(|e| match e {
                    Element::Symbol(c) => *c,
                    Element::Vector(_) => unreachable!("symbol dataset holds vectors"),
                }));
                out.push('\n');
            }
            out
        }
        Alphabet::Vectors(_) => {
            let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
            for s in &ds.sequences {
                for e in &s.elements {
                    if let Element::Vector(p) = e {
                        let mut row = vec![s.id.clone()];
                        row.extend(p.coords().iter().map(|c| c.to_string()));
                        w.write_record(&row).expect("in-memory csv write");
                    }
                }
            }
            String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("utf-8 csv")
        }
    }
}
