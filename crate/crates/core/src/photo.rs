//! Photo evidence: stores the client-compressed JPEG verbatim, re-encodes
//! its thumbnail to WebP and keeps size bookkeeping for each asset.

use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, FixedOffset};
use image::{ImageFormat, RgbImage};
use rand::RngCore;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::auth::{EndpointGroup, Session};
use crate::clock::{format_ts, parse_ts};
use crate::error::{Error, Result};
use crate::ids::PhotoId;
use crate::store::Tx;
use crate::Campus;

/// Longest side allowed for an uploaded or stored thumbnail, in pixels.
pub const THUMB_MAX_DIM: u32 = 300;
pub const WEBP_QUALITY: f32 = 70.0;
/// libwebp effort level (0 fastest .. 6 smallest output).
pub const WEBP_METHOD: i32 = 6;

/// One client upload: main photo, its thumbnail and the pre-compression size.
#[derive(Debug, Clone)]
pub struct PhotoUpload {
    pub main: Vec<u8>,
    pub thumb: Vec<u8>,
    pub original_size: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhotoAsset {
    pub id: PhotoId,
    pub original_size: u64,
    pub compressed_size: u64,
    pub compression_ratio: f64,
    pub thumbnail_size: u64,
    pub main_path: String,
    pub thumb_path: String,
    pub content_hash: String,
    pub uploaded_at: DateTime<FixedOffset>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Main,
    Thumb,
}

impl Variant {
    pub fn content_type(self) -> &'static str {
        match self {
            Variant::Main => "image/jpeg",
            Variant::Thumb => "image/webp",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "main" => Ok(Variant::Main),
            "thumb" => Ok(Variant::Thumb),
            _ => Err(Error::NotFound),
        }
    }
}

fn decode_jpeg(bytes: &[u8]) -> Result<RgbImage> {
    image::load_from_memory_with_format(bytes, ImageFormat::Jpeg)
        .map(|img| img.to_rgb8())
        .map_err(|e| Error::InvalidImage(e.to_string()))
}

/// Decodes a JPEG thumbnail and re-encodes it as lossy WebP at quality 70.
/// Pixel dimensions are preserved.
pub fn webp_reencode(thumb_jpeg: &[u8]) -> Result<Vec<u8>> {
    let rgb = decode_jpeg(thumb_jpeg)?;
    encode_webp(&rgb)
}

fn encode_webp(rgb: &RgbImage) -> Result<Vec<u8>> {
    let encoder = webp::Encoder::from_rgb(rgb.as_raw(), rgb.width(), rgb.height());
    let mut config = webp::WebPConfig::new().map_err(|_| Error::Internal("webp config".into()))?;
    config.quality = WEBP_QUALITY;
    config.method = WEBP_METHOD;
    let out = encoder
        .encode_advanced(&config)
        .map_err(|e| Error::InvalidImage(format!("webp encode failed: {e:?}")))?;
    Ok(out.to_vec())
}

/// Pixel dimensions of a WebP image.
pub fn webp_dimensions(bytes: &[u8]) -> Option<(u32, u32)> {
    webp::BitstreamFeatures::new(bytes).map(|f| (f.width(), f.height()))
}

/// Checks an upload without touching storage; returns the WebP thumbnail.
pub fn validate_upload(upload: &PhotoUpload, max_bytes: u64) -> Result<Vec<u8>> {
    if upload.main.len() as u64 > max_bytes {
        return Err(Error::TooLarge { limit: max_bytes });
    }
    if upload.original_size == 0 {
        return Err(Error::Invalid("original_size must be positive".into()));
    }
    decode_jpeg(&upload.main)?;
    let thumb = decode_jpeg(&upload.thumb)?;
    if thumb.width() > THUMB_MAX_DIM || thumb.height() > THUMB_MAX_DIM {
        return Err(Error::ThumbnailOversized);
    }
    encode_webp(&thumb)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// `<kind>/<first two hash chars>/<hash>.<ext>`
fn content_path(kind: &str, hash: &str, ext: &str) -> String {
    format!("{kind}/{}/{hash}.{ext}", &hash[..2])
}

fn write_atomically(root: &Path, rel: &str, bytes: &[u8]) -> Result<()> {
    let dest = root.join(rel);
    let dir = dest.parent().expect("content paths have a parent");
    std::fs::create_dir_all(dir)?;
    let mut suffix = [0u8; 8];
    rand::rng().fill_bytes(&mut suffix);
    let tmp = dir.join(format!(".{}.tmp", hex::encode(suffix)));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, &dest)?;
    Ok(())
}

const PHOTO_COLUMNS: &str = "id, original_size, compressed_size, compression_ratio, thumbnail_size, main_path, thumb_path, content_hash, uploaded_at";

fn photo_from_row(r: &rusqlite::Row<'_>) -> rusqlite::Result<PhotoAsset> {
    let uploaded: String = r.get(8)?;
    Ok(PhotoAsset {
        id: r.get(0)?,
        original_size: r.get(1)?,
        compressed_size: r.get(2)?,
        compression_ratio: r.get(3)?,
        thumbnail_size: r.get(4)?,
        main_path: r.get(5)?,
        thumb_path: r.get(6)?,
        content_hash: r.get(7)?,
        uploaded_at: parse_ts(&uploaded)
            .map_err(|e| rusqlite::Error::FromSqlConversionFailure(8, rusqlite::types::Type::Text, Box::new(e)))?,
    })
}

pub(crate) fn load_photo(tx: &Tx<'_>, id: PhotoId) -> Result<PhotoAsset> {
    tx.query_opt(
        &format!("SELECT {PHOTO_COLUMNS} FROM photos WHERE id = ?1"),
        [id],
        photo_from_row,
    )?
    .ok_or(Error::NotFound)
}

/// One disagreement found by [`Photos::consistency_scan`].
#[derive(Debug, Clone, PartialEq)]
pub struct Inconsistency {
    pub photo: PhotoId,
    pub problem: String,
}

pub struct Photos<'a> {
    pub(crate) campus: &'a Campus,
}

impl Photos<'_> {
    pub fn media_dir(&self) -> &Path {
        &self.campus.config.media_dir
    }

    pub fn ingest(&self, upload: &PhotoUpload, actor: &Session) -> Result<PhotoAsset> {
        self.campus.require(actor, EndpointGroup::HousekeepingComplete)?;
        let webp = validate_upload(upload, self.campus.config.max_photo_bytes)?;
        let content_hash = sha256_hex(&upload.main);
        let main_path = content_path("main", &content_hash, "jpg");
        let thumb_path = content_path("thumb", &sha256_hex(&webp), "webp");
        // Files land before the row commits; a crash leaves only orphans.
        write_atomically(self.media_dir(), &main_path, &upload.main)?;
        write_atomically(self.media_dir(), &thumb_path, &webp)?;

        let compressed_size = upload.main.len() as u64;
        let compression_ratio = upload.original_size as f64 / compressed_size as f64;
        let uploaded_at = self.campus.clock.now();
        let id = self.campus.store.write(|tx| {
            tx.execute(
                "INSERT INTO photos (original_size, compressed_size, compression_ratio, thumbnail_size,
                                     main_path, thumb_path, content_hash, uploaded_at, uploaded_by)
                 VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8, ?9)",
                rusqlite::params![
                    upload.original_size,
                    compressed_size,
                    compression_ratio,
                    webp.len() as u64,
                    main_path,
                    thumb_path,
                    content_hash,
                    format_ts(&uploaded_at),
                    actor.user_id(),
                ],
            )?;
            Ok(PhotoId(tx.last_insert_rowid()))
        })?;
        Ok(PhotoAsset {
            id,
            original_size: upload.original_size,
            compressed_size,
            compression_ratio,
            thumbnail_size: webp.len() as u64,
            main_path,
            thumb_path,
            content_hash,
            uploaded_at,
        })
    }

    pub fn get(&self, id: PhotoId) -> Result<PhotoAsset> {
        self.campus.store.read(|tx| load_photo(tx, id))
    }

    pub fn all(&self) -> Result<Vec<PhotoAsset>> {
        self.campus.store.read(|tx| {
            tx.query_all(
                &format!("SELECT {PHOTO_COLUMNS} FROM photos ORDER BY id"),
                [],
                photo_from_row,
            )
        })
    }

    fn path_of(&self, asset: &PhotoAsset, variant: Variant) -> PathBuf {
        let rel = match variant {
            Variant::Main => &asset.main_path,
            Variant::Thumb => &asset.thumb_path,
        };
        self.media_dir().join(rel)
    }

    /// Stored bytes and content type. The main image is returned exactly as uploaded.
    pub fn serve(&self, id: PhotoId, variant: Variant, actor: &Session) -> Result<(Vec<u8>, &'static str)> {
        self.campus.require(actor, EndpointGroup::PhotosView)?;
        let asset = self.get(id)?;
        let bytes = std::fs::read(self.path_of(&asset, variant)).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::NotFound,
            _ => Error::Io(e),
        })?;
        Ok((bytes, variant.content_type()))
    }

    /// Compares every persisted asset against the files on disk.
    pub fn consistency_scan(&self) -> Result<Vec<Inconsistency>> {
        let mut problems = Vec::new();
        for asset in self.all()? {
            let mut flag = |problem: String| {
                problems.push(Inconsistency {
                    photo: asset.id,
                    problem,
                })
            };
            match std::fs::read(self.path_of(&asset, Variant::Main)) {
                Ok(main) => {
                    if main.len() as u64 != asset.compressed_size {
                        flag(format!("main is {} bytes, recorded {}", main.len(), asset.compressed_size));
                    }
                    if sha256_hex(&main) != asset.content_hash {
                        flag("main content hash mismatch".into());
                    }
                }
                Err(e) => flag(format!("main unreadable: {e}")),
            }
            match std::fs::read(self.path_of(&asset, Variant::Thumb)) {
                Ok(thumb) => {
                    if thumb.len() as u64 != asset.thumbnail_size {
                        flag(format!("thumb is {} bytes, recorded {}", thumb.len(), asset.thumbnail_size));
                    }
                    match webp_dimensions(&thumb) {
                        Some((w, h)) if w.max(h) <= THUMB_MAX_DIM => {}
                        Some((w, h)) => flag(format!("thumb is {w}x{h}")),
                        None => flag("thumb is not webp".into()),
                    }
                }
                Err(e) => flag(format!("thumb unreadable: {e}")),
            }
            let expected = asset.original_size as f64 / asset.compressed_size as f64;
            if ((asset.compression_ratio - expected) / expected).abs() > 1e-6 {
                flag(format!("ratio {} != {}", asset.compression_ratio, expected));
            }
        }
        Ok(problems)
    }
}
