use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

pub const IMAGE_EXTENSIONS: [&str; 4] = ["png", "ppm", "pgm", "pnm"];

/// File name without its last extension. Dots inside the stem are kept.
pub fn stem_of(path: &Path) -> String {
    path.file_stem().unwrap_or_default().to_string_lossy().into_owned()
}

/// `dir/<stem>.<ext>` for the first extension that exists.
pub fn find_with_stem(dir: &Path, stem: &str, extensions: &[&str]) -> Result<PathBuf> {
    for ext in extensions {
        let p = dir.join(format!("{stem}.{ext}"));
        if p.is_file() {
            return Ok(p);
        }
    }
    bail!(
        "no file named '{stem}.{{{}}}' in {}",
        extensions.join(","),
        dir.display()
    )
}

/// Files in `dir` with extension `ext`, sorted by name.
pub fn list_with_extension(dir: &Path, ext: &str) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).with_context(|| format!("cannot read directory {}", dir.display()))?;
    let mut out = Vec::new();
    for e in entries {
        let p = e
            .with_context(|| format!("cannot read directory {}", dir.display()))?
            .path();
        if p.is_file() && p.extension().is_some_and(|x| x.eq_ignore_ascii_case(ext)) {
            out.push(p);
        }
    }
    out.sort();
    Ok(out)
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create directory {}", dir.display()))
}

pub fn require_dir(dir: &Path) -> Result<()> {
    if !dir.is_dir() {
        bail!("{} is not a directory", dir.display());
    }
    Ok(())
}
