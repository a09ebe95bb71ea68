//! Files, formats and the end-to-end pipeline.

pub mod canonical;
pub mod config;
pub mod evaluate;
pub mod html;
pub mod label;
pub mod page;
pub mod pipeline;

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

pub use canonical::to_canonical_string;
pub use config::Config;
pub use evaluate::{evaluate_detection, evaluate_structure, match_tables, DetectionReport, StructureReport};
pub use html::{emit_html, parse_html, HtmlCell, HtmlTable};
pub use label::{align_html_to_tokens, Alignment, LabelConfig};
pub use page::{
    from_value_at, page_to_string, pages_to_string, parse_json,
    load_page, load_pages, parse_page, parse_pages, save_page, save_pages, ClipWarning, LoadedPages, PageInput,
    PageTables, TableRecord, TablesFile,
};
pub use pipeline::{page_tables, run_pipeline, suppress_page, ExtractedTable};

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}
