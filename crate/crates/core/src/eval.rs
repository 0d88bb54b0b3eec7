//! Track evaluation: detection rate, estimation error and relative error,
//! optionally restricted to phonetic categories.
//!
//! Frames are compared position by position between a reference and a
//! hypothesis track. A formant counts as detected when its deviation is
//! below both a relative and an absolute threshold; estimation error is the
//! mean absolute deviation in Hz; the relative variant normalizes by the
//! reference frequency. Frames marked invalid on either side are excluded.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::refine::{format_sig6, FormantTrack};

/// Default relative detection threshold (fraction of the reference value).
pub const DEFAULT_TAU_RELATIVE: f64 = 0.30;

/// Default absolute detection threshold in Hz.
pub const DEFAULT_TAU_ABSOLUTE_HZ: f64 = 300.0;

/// Frame times must agree within this tolerance to share a grid.
const GRID_TOLERANCE_S: f64 = 1e-4;

/// Broad phonetic classes for per-category reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Category {
    Vowel,
    Diphthong,
    Semivowel,
    Nasal,
    Fricative,
    VoiceBar,
    Stop,
    Other,
}

impl Category {
    pub const ALL: [Category; 8] = [
        Category::Vowel,
        Category::Diphthong,
        Category::Semivowel,
        Category::Nasal,
        Category::Fricative,
        Category::VoiceBar,
        Category::Stop,
        Category::Other,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Category::Vowel => "vowel",
            Category::Diphthong => "diphthong",
            Category::Semivowel => "semivowel",
            Category::Nasal => "nasal",
            Category::Fricative => "fricative",
            Category::VoiceBar => "voice_bar",
            Category::Stop => "stop",
            Category::Other => "other",
        }
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vowel" => Ok(Category::Vowel),
            "diphthong" => Ok(Category::Diphthong),
            "semivowel" => Ok(Category::Semivowel),
            "nasal" => Ok(Category::Nasal),
            "fricative" => Ok(Category::Fricative),
            "voice_bar" => Ok(Category::VoiceBar),
            "stop" => Ok(Category::Stop),
            "other" => Ok(Category::Other),
            _ => Err(Error::invalid("category", format!("unknown category '{s}'"))),
        }
    }
}

/// Phone-to-category lookup table.
#[derive(Debug, Clone)]
pub struct CategoryMap {
    entries: BTreeMap<String, Category>,
}

const DEFAULT_CATEGORY_TABLE: &str = include_str!("../data/timit_categories.txt");

impl CategoryMap {
    /// The table shipped with the crate, covering the standard TIMIT phone
    /// inventory.
    pub fn default_map() -> Self {
        Self::parse(DEFAULT_CATEGORY_TABLE, "<built-in>").expect("built-in table must parse")
    }

    /// Loads a table from a text file: one `phone category` pair per line.
    /// Lines starting with `#` are comments (phone labels such as `h#` may
    /// themselves contain `#`, so comments are whole-line only).
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (phone, category) = match (parts.next(), parts.next(), parts.next()) {
                (Some(p), Some(c), None) => (p, c),
                _ => {
                    return Err(Error::parse(
                        origin,
                        idx + 1,
                        "expected '<phone> <category>'".to_string(),
                    ))
                }
            };
            let category = Category::from_str(category)
                .map_err(|e| Error::parse(origin, idx + 1, e.to_string()))?;
            entries.insert(phone.to_string(), category);
        }
        Ok(Self { entries })
    }

    /// Category for a phone; unknown phones map to [`Category::Other`].
    pub fn lookup(&self, phone: &str) -> (Category, bool) {
        match self.entries.get(phone) {
            Some(&c) => (c, true),
            None => (Category::Other, false),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// One labeled interval, in samples, half-open.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhoneSegment {
    pub start_sample: u64,
    pub end_sample: u64,
    pub label: String,
}

/// A non-overlapping, ascending sequence of labeled intervals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhoneSegmentation {
    segments: Vec<PhoneSegment>,
}

impl PhoneSegmentation {
    pub fn new(segments: Vec<PhoneSegment>) -> Result<Self> {
        for seg in &segments {
            if seg.start_sample >= seg.end_sample {
                return Err(Error::invalid(
                    "phone segmentation",
                    format!("segment '{}' is empty or reversed", seg.label),
                ));
            }
        }
        for pair in segments.windows(2) {
            if pair[1].start_sample < pair[0].end_sample {
                return Err(Error::invalid(
                    "phone segmentation",
                    format!(
                        "segments '{}' and '{}' overlap or are out of order",
                        pair[0].label, pair[1].label
                    ),
                ));
            }
        }
        Ok(Self { segments })
    }

    /// Reads the `.phn` convention: `start_sample end_sample label` per line.
    pub fn read_phn(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut segments = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (start, end, label) = match (parts.next(), parts.next(), parts.next(), parts.next())
            {
                (Some(s), Some(e), Some(l), None) => (s, e, l),
                _ => {
                    return Err(Error::parse(
                        path,
                        idx + 1,
                        "expected '<start_sample> <end_sample> <label>'".to_string(),
                    ))
                }
            };
            let start_sample: u64 = start
                .parse()
                .map_err(|_| Error::parse(path, idx + 1, format!("'{start}' is not an integer")))?;
            let end_sample: u64 = end
                .parse()
                .map_err(|_| Error::parse(path, idx + 1, format!("'{end}' is not an integer")))?;
            segments.push(PhoneSegment { start_sample, end_sample, label: label.to_string() });
        }
        Self::new(segments)
    }

    pub fn segments(&self) -> &[PhoneSegment] {
        &self.segments
    }

    /// Label covering a sample position, if any.
    pub fn label_at(&self, sample: u64) -> Option<&str> {
        let idx = self
            .segments
            .partition_point(|seg| seg.end_sample <= sample);
        self.segments.get(idx).and_then(|seg| {
            (seg.start_sample <= sample).then_some(seg.label.as_str())
        })
    }
}

/// Which categories contribute frames to the overall metrics.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum CategorySelection {
    #[default]
    All,
    Only(Vec<Category>),
}

impl CategorySelection {
    fn admits(&self, category: Category) -> bool {
        match self {
            CategorySelection::All => true,
            CategorySelection::Only(list) => list.contains(&category),
        }
    }
}

impl FromStr for CategorySelection {
    type Err = Error;

    /// Parses `all` or a comma-separated category list.
    fn from_str(s: &str) -> Result<Self> {
        if s.trim() == "all" {
            return Ok(CategorySelection::All);
        }
        let mut list = Vec::new();
        for part in s.split(',') {
            let category = Category::from_str(part.trim())?;
            if !list.contains(&category) {
                list.push(category);
            }
        }
        if list.is_empty() {
            return Err(Error::invalid("categories", "empty category list"));
        }
        Ok(CategorySelection::Only(list))
    }
}

/// Evaluation settings.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    /// Relative detection threshold, strict, as a fraction of the reference.
    pub tau_relative: f64,
    /// Absolute detection threshold in Hz, strict.
    pub tau_absolute_hz: f64,
    /// Category restriction for the overall metrics.
    pub categories: CategorySelection,
    /// Sample rate used to convert track times to label samples.
    pub sample_rate: u32,
    /// Added to frame times before the label lookup.
    pub label_offset_s: f64,
    /// Emit the per-category breakdown (requires labels).
    pub per_category: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            tau_relative: DEFAULT_TAU_RELATIVE,
            tau_absolute_hz: DEFAULT_TAU_ABSOLUTE_HZ,
            categories: CategorySelection::All,
            sample_rate: 8000,
            label_offset_s: 0.0,
            per_category: false,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.tau_relative.is_finite() || self.tau_relative <= 0.0 {
            return Err(Error::invalid("tau_relative", "must be positive"));
        }
        if !self.tau_absolute_hz.is_finite() || self.tau_absolute_hz <= 0.0 {
            return Err(Error::invalid("tau_absolute_hz", "must be positive"));
        }
        if self.sample_rate == 0 {
            return Err(Error::invalid("sample_rate", "must be positive"));
        }
        if !self.label_offset_s.is_finite() {
            return Err(Error::invalid("label_offset_s", "must be finite"));
        }
        Ok(())
    }
}

/// Detection test for one formant pair: both the relative and the absolute
/// deviation must fall strictly below their thresholds.
pub fn formant_detected(ref_hz: f64, hyp_hz: f64, config: &EvalConfig) -> bool {
    let delta = (ref_hz - hyp_hz).abs();
    delta / ref_hz < config.tau_relative && delta < config.tau_absolute_hz
}

/// Metrics for one formant within one frame selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsCell {
    pub fdr_percent: f64,
    pub fee_hz: f64,
    pub mad_percent: f64,
}

/// Metrics over one frame selection (a category, or everything).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRow {
    pub per_formant: [MetricsCell; 3],
    pub frames: usize,
}

/// Evaluation output: overall metrics plus an optional category breakdown.
/// Categories that selected no frames are absent rather than zero.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub overall: MetricsRow,
    pub by_category: Vec<(Category, MetricsRow)>,
    /// Frames whose phone label was missing from the category table.
    pub unknown_labels: usize,
}

/// Compensated accumulator, so parallel or reordered summation reproduces
/// sequential results to tight tolerance.
#[derive(Debug, Clone, Copy, Default)]
struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    fn add(&mut self, v: f64) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Accumulator {
    detected: [usize; 3],
    fee: [Kahan; 3],
    mad: [Kahan; 3],
    frames: usize,
}

impl Accumulator {
    fn add(&mut self, reference: [f64; 3], hypothesis: [f64; 3], config: &EvalConfig) {
        self.frames += 1;
        for i in 0..3 {
            let delta = (reference[i] - hypothesis[i]).abs();
            if formant_detected(reference[i], hypothesis[i], config) {
                self.detected[i] += 1;
            }
            self.fee[i].add(delta);
            self.mad[i].add(delta / reference[i]);
        }
    }

    fn finish(&self) -> Option<MetricsRow> {
        if self.frames == 0 {
            return None;
        }
        let k = self.frames as f64;
        let per_formant = std::array::from_fn(|i| MetricsCell {
            fdr_percent: 100.0 * self.detected[i] as f64 / k,
            fee_hz: self.fee[i].value() / k,
            mad_percent: 100.0 * self.mad[i].value() / k,
        });
        Some(MetricsRow { per_formant, frames: self.frames })
    }
}

/// Assigns a category to each frame time via the segmentation and map.
/// Returns the per-frame categories and the count of unknown labels seen.
pub fn map_phones_to_categories(
    times_s: &[f64],
    segmentation: &PhoneSegmentation,
    map: &CategoryMap,
    config: &EvalConfig,
) -> (Vec<Category>, usize) {
    let mut unknown = 0usize;
    let categories = times_s
        .iter()
        .map(|&t| {
            let position = (t + config.label_offset_s) * config.sample_rate as f64;
            if position < 0.0 {
                return Category::Other;
            }
            match segmentation.label_at(position.round() as u64) {
                Some(label) => {
                    let (category, known) = map.lookup(label);
                    if !known {
                        unknown += 1;
                    }
                    category
                }
                None => Category::Other,
            }
        })
        .collect();
    (categories, unknown)
}

/// Compares a hypothesis track against a reference on the same frame grid.
///
/// Frames invalid on either side are excluded. With labels, each frame is
/// assigned a category; the overall metrics honor the configured category
/// selection and the per-category breakdown reports every category that
/// contributed at least one frame.
pub fn evaluate(
    reference: &FormantTrack,
    hypothesis: &FormantTrack,
    labels: Option<(&PhoneSegmentation, &CategoryMap)>,
    config: &EvalConfig,
) -> Result<EvalReport> {
    config.validate()?;
    if reference.len() != hypothesis.len() {
        return Err(Error::FrameCountMismatch {
            left: reference.len(),
            right: hypothesis.len(),
        });
    }
    for (row, (r, h)) in reference.frames().iter().zip(hypothesis.frames()).enumerate() {
        let delta_s = (r.time_s - h.time_s).abs();
        if delta_s > GRID_TOLERANCE_S {
            return Err(Error::GridMismatch { row, delta_s });
        }
    }

    let times: Vec<f64> = reference.frames().iter().map(|f| f.time_s).collect();
    let (categories, unknown_labels) = match labels {
        Some((segmentation, map)) => {
            let (c, unknown) = map_phones_to_categories(&times, segmentation, map, config);
            (Some(c), unknown)
        }
        None => (None, 0),
    };

    let mut overall = Accumulator::default();
    let mut per_category: BTreeMap<Category, Accumulator> = BTreeMap::new();
    for (idx, (r, h)) in reference.frames().iter().zip(hypothesis.frames()).enumerate() {
        if !r.valid || !h.valid {
            continue;
        }
        let category = categories.as_ref().map(|c| c[idx]).unwrap_or(Category::Other);
        if config.categories.admits(category) {
            overall.add(r.formants_hz, h.formants_hz, config);
        }
        if categories.is_some() && config.per_category {
            per_category
                .entry(category)
                .or_default()
                .add(r.formants_hz, h.formants_hz, config);
        }
    }

    let overall = overall.finish().ok_or(Error::EmptySelection)?;
    let by_category = per_category
        .into_iter()
        .filter_map(|(c, acc)| acc.finish().map(|row| (c, row)))
        .collect();
    Ok(EvalReport { overall, by_category, unknown_labels })
}

impl EvalReport {
    /// Human-readable fixed-width table.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<12} {:>7} {:>8} {:>10} {:>10} {:>10}",
            "category", "frames", "formant", "FDR %", "FEE Hz", "MAD %"
        );
        let mut write_row = |name: &str, row: &MetricsRow| {
            for (i, cell) in row.per_formant.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{:<12} {:>7} {:>8} {:>10.1} {:>10.1} {:>10.1}",
                    name,
                    row.frames,
                    format!("F{}", i + 1),
                    cell.fdr_percent,
                    cell.fee_hz,
                    cell.mad_percent
                );
            }
        };
        write_row("all", &self.overall);
        for (category, row) in &self.by_category {
            write_row(category.as_str(), row);
        }
        out
    }

    /// Machine-readable CSV, one row per category and formant.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("category,formant,fdr_percent,fee_hz,mad_percent,frames\n");
        let mut write_rows = |name: &str, row: &MetricsRow| {
            for (i, cell) in row.per_formant.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    name,
                    i + 1,
                    format_sig6(cell.fdr_percent),
                    format_sig6(cell.fee_hz),
                    format_sig6(cell.mad_percent),
                    row.frames
                );
            }
        };
        write_rows("all", &self.overall);
        for (category, row) in &self.by_category {
            write_rows(category.as_str(), row);
        }
        out
    }
}

// ---------------------------------------------------------------------------
