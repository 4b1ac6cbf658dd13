//! C interface to `dlcomm`.
//!
//! Every function returns a [`DlcStatus`] code and writes results through
//! out-pointers. On failure the message is kept per thread and can be read
//! with [`dlc_last_error`]. Handles are opaque and must be released with the
//! matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dlcomm::autoencoder::{self, Autoencoder, TrainingConfig};
use dlcomm::baseline::{self, BaselineScheme};
use dlcomm::channel::{self, ChannelSpec};
use dlcomm::harness::{estimate_baseline, estimate_bler, AxisKind, MetricRecord};
use dlcomm::representation::{build_gdr, build_onehot, Codebook, MessageId};
use dlcomm::rng::seeded;
use dlcomm::{analysis, Error};

/// Result code of every `dlc_*` call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DlcStatus {
    Ok = 0,
    NullPointer = 1,
    Shape = 2,
    Domain = 3,
    Degenerate = 4,
    Singular = 5,
    Diverged = 6,
    Checkpoint = 7,
    Config = 8,
    UnknownRecipe = 9,
    Io = 10,
    InvalidString = 11,
    Panic = 12,
}

impl From<&Error> for DlcStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Shape(_) => DlcStatus::Shape,
            Error::Domain(_) => DlcStatus::Domain,
            Error::Degenerate(_) => DlcStatus::Degenerate,
            Error::Singular { .. } => DlcStatus::Singular,
            Error::TrainingDiverged { .. } => DlcStatus::Diverged,
            Error::Checkpoint(_) => DlcStatus::Checkpoint,
            Error::Config { .. } => DlcStatus::Config,
            Error::UnknownRecipe { .. } => DlcStatus::UnknownRecipe,
            Error::Io { .. } => DlcStatus::Io,
        }
    }
}

/// Opaque codebook handle.
pub struct DlcCodebook(Codebook);

/// Opaque autoencoder handle.
pub struct DlcModel(Autoencoder);

/// Noise axis for evaluation calls.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DlcAxis {
    EbN0Db = 0,
    SnrDb = 1,
}

/// Conventional schemes for [`dlc_baseline_estimate`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DlcBaseline {
    HammingHd = 0,
    HammingMl = 1,
    UncodedBpsk = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DlcParamCounts {
    pub dense: usize,
    pub normalization: usize,
    pub relu: usize,
    pub softmax: usize,
    pub total: usize,
}

/// Training options. `snr_set` may be null, in which case `snr_db` is used
/// for every sample.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DlcTrainOptions {
    pub epochs: usize,
    pub batch_size: usize,
    pub train_samples: usize,
    pub learning_rate: f64,
    pub snr_db: f64,
    pub snr_set: *const f64,
    pub snr_set_len: usize,
    pub seed: u64,
}

/// Error-rate estimate with 95% half-widths.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DlcMetrics {
    pub sigma2: f64,
    pub rate: f64,
    pub blocks: u64,
    pub block_errors: u64,
    pub bit_errors: u64,
    pub bler: f64,
    pub bler_ci95: f64,
    pub ber: f64,
    pub ber_ci95: f64,
    /// Nonzero when fewer than 100 block errors were observed.
    pub low_confidence: i32,
}

impl From<&MetricRecord> for DlcMetrics {
    fn from(r: &MetricRecord) -> Self {
        DlcMetrics {
            sigma2: r.sigma2,
            rate: r.rate,
            blocks: r.blocks,
            block_errors: r.block_errors,
            bit_errors: r.bit_errors,
            bler: r.bler,
            bler_ci95: r.bler_ci95,
            ber: r.ber,
            ber_ci95: r.ber_ci95,
            low_confidence: r.low_confidence as i32,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = c);
}

enum Failure {
    Core(Error),
    Null(&'static str),
    BadString(&'static str),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type FfiResult = Result<(), Failure>;

fn guard(f: impl FnOnce() -> FfiResult) -> DlcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error(String::new());
            DlcStatus::Ok
        }
        Ok(Err(Failure::Core(e))) => {
            set_last_error(e.to_string());
            DlcStatus::from(&e)
        }
        Ok(Err(Failure::Null(arg))) => {
            set_last_error(format!("null pointer passed as `{arg}`"));
            DlcStatus::NullPointer
        }
        Ok(Err(Failure::BadString(arg))) => {
            set_last_error(format!("`{arg}` is not valid UTF-8"));
            DlcStatus::InvalidString
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            set_last_error(format!("panic: {msg}"));
            DlcStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(name))
}

unsafe fn write<T>(p: *mut T, name: &'static str, value: T) -> FfiResult {
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    p.write(value);
    Ok(())
}

unsafe fn slice<'a>(p: *const f64, len: usize, name: &'static str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, name: &'static str) -> Result<&'a mut [T], Failure> {
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn c_path<'a>(p: *const c_char, name: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure::BadString(name))
}

fn copy_out(src: &[f64], dst: &mut [f64]) -> FfiResult {
    if src.len() != dst.len() {
        return Err(Error::shape(format!(
            "output buffer holds {} values, result has {}",
            dst.len(),
            src.len()
        ))
        .into());
    }
    dst.copy_from_slice(src);
    Ok(())
}

fn make_codebook(size: usize, order: usize) -> dlcomm::Result<Codebook> {
    if order == 1 {
        build_onehot(size)
    } else {
        build_gdr(size, order)
    }
}

fn message(codebook: &Codebook, index: usize) -> dlcomm::Result<MessageId> {
    codebook.message(index)
}

/// Message of the most recent failing call on this thread, or an empty
/// string. Valid until the next `dlc_*` call on the same thread.
#[no_mangle]
pub extern "C" fn dlc_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dlc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Codebook of vector size `size`; `order == 1` gives one-hot, larger
/// orders give a GDR codebook.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dlc_codebook_new(size: usize, order: usize, out: *mut *mut DlcCodebook) -> DlcStatus {
    guard(|| {
        let cb = make_codebook(size, order)?;
        write(out, "out", Box::into_raw(Box::new(DlcCodebook(cb))))
    })
}

/// # Safety
/// `codebook` must come from [`dlc_codebook_new`] or be null.
#[no_mangle]
pub unsafe extern "C" fn dlc_codebook_free(codebook: *mut DlcCodebook) {
    if !codebook.is_null() {
        drop(Box::from_raw(codebook));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dlc_codebook_len(codebook: *const DlcCodebook, out: *mut usize) -> DlcStatus {
    guard(|| write(out, "out", deref(codebook, "codebook")?.0.len()))
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dlc_codebook_bits(codebook: *const DlcCodebook, out: *mut u32) -> DlcStatus {
    guard(|| write(out, "out", deref(codebook, "codebook")?.0.bits_per_message()))
}

/// Copies entry `index` into `out`, which must hold `size` values.
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn dlc_codebook_entry(
    codebook: *const DlcCodebook,
    index: usize,
    out: *mut f64,
    len: usize,
) -> DlcStatus {
    guard(|| {
        let cb = &deref(codebook, "codebook")?.0;
        let id = message(cb, index)?;
        copy_out(cb.entry(id), slice_mut(out, len, "out")?)
    })
}

/// Top-m decision on a probability vector of length `size`.
///
/// # Safety
/// `p` must point to `len` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn dlc_codebook_decode(
    codebook: *const DlcCodebook,
    p: *const f64,
    len: usize,
    out_index: *mut usize,
) -> DlcStatus {
    guard(|| {
        let cb = &deref(codebook, "codebook")?.0;
        let id = cb.decode_top_m(slice(p, len, "p")?)?;
        write(out_index, "out_index", id.0)
    })
}

/// Bits per channel use of a codebook over `channel_uses` uses.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dlc_data_rate(codebook: *const DlcCodebook, channel_uses: usize, out: *mut f64) -> DlcStatus {
    guard(|| {
        let cb = &deref(codebook, "codebook")?.0;
        if channel_uses == 0 {
            return Err(Error::domain("channel_uses must be at least 1").into());
        }
        write(out, "out", dlcomm::representation::data_rate(cb, channel_uses))
    })
}

/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn dlc_sigma2_from_ebn0(rate: f64, ebn0_db: f64, out: *mut f64) -> DlcStatus {
    guard(|| write(out, "out", channel::sigma2_from_ebn0(rate, ebn0_db)?))
}

#[no_mangle]
pub extern "C" fn dlc_sigma2_from_snr_db(snr_db: f64) -> f64 {
    channel::snr_db_to_sigma2(snr_db)
}

#[no_mangle]
pub extern "C" fn dlc_param_counts(size: usize, channel_uses: usize) -> DlcParamCounts {
    let c = autoencoder::theoretical_param_count(size, channel_uses);
    DlcParamCounts {
        dense: c.dense,
        normalization: c.normalization,
        relu: c.relu,
        softmax: c.softmax,
        total: c.total,
    }
}

/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn dlc_achievable_rate(
    size: usize,
    order: usize,
    channel_uses: usize,
    ebn0_db: f64,
    out: *mut f64,
) -> DlcStatus {
    guard(|| {
        write(
            out,
            "out",
            analysis::achievable_rate(size, order, channel_uses, ebn0_db)?,
        )
    })
}

/// Untrained model with Glorot-initialized weights.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn dlc_model_new(
    size: usize,
    order: usize,
    channel_uses: usize,
    seed: u64,
    out: *mut *mut DlcModel,
) -> DlcStatus {
    guard(|| {
        let cb = make_codebook(size, order)?;
        let model = autoencoder::build_model(cb, channel_uses, seed)?;
        write(out, "out", Box::into_raw(Box::new(DlcModel(model))))
    })
}

/// # Safety
/// `model` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn dlc_model_free(model: *mut DlcModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Options matching the library defaults, at a fixed 10 dB training SNR.
#[no_mangle]
pub extern "C" fn dlc_train_options_default() -> DlcTrainOptions {
    let d = TrainingConfig::default();
    DlcTrainOptions {
        epochs: d.epochs,
        batch_size: d.batch_size,
        train_samples: d.train_samples,
        learning_rate: d.adam.learning_rate,
        snr_db: 10.0,
        snr_set: ptr::null(),
        snr_set_len: 0,
        seed: d.seed,
    }
}

/// Trains in place. `final_loss` receives the last epoch's mean loss and
/// may be null.
///
/// # Safety
/// `model` and `options` must be valid; `options.snr_set` must point to
/// `snr_set_len` doubles when non-null.
#[no_mangle]
pub unsafe extern "C" fn dlc_model_train(
    model: *mut DlcModel,
    options: *const DlcTrainOptions,
    final_loss: *mut f64,
) -> DlcStatus {
    guard(|| {
        let model = &mut model.as_mut().ok_or(Failure::Null("model"))?.0;
        let o = deref(options, "options")?;
        let mut config = TrainingConfig {
            epochs: o.epochs,
            batch_size: o.batch_size,
            train_samples: o.train_samples,
            seed: o.seed,
            ..TrainingConfig::default()
        };
        config.adam.learning_rate = o.learning_rate;
        config = if o.snr_set.is_null() {
            config.with_snr_db(o.snr_db)
        } else {
            config.with_snr_set(slice(o.snr_set, o.snr_set_len, "options.snr_set")?.to_vec())
        };
        let trace = autoencoder::train(model, &config)?;
        if !final_loss.is_null() {
            final_loss.write(trace.epoch_losses.last().copied().unwrap_or(f64::NAN));
        }
        Ok(())
    })
}

/// # Safety
/// `model` and `path` must be valid; `path` is NUL-terminated UTF-8.
#[no_mangle]
pub unsafe extern "C" fn dlc_model_save(model: *const DlcModel, path: *const c_char) -> DlcStatus {
    guard(|| {
        Ok(autoencoder::save_checkpoint(
            &deref(model, "model")?.0,
            c_path(path, "path")?,
        )?)
    })
}

/// # Safety
/// `path` is NUL-terminated UTF-8; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn dlc_model_load(path: *const c_char, out: *mut *mut DlcModel) -> DlcStatus {
    guard(|| {
        let model = autoencoder::load_checkpoint(c_path(path, "path")?)?;
        write(out, "out", Box::into_raw(Box::new(DlcModel(model))))
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dlc_model_channel_uses(model: *const DlcModel, out: *mut usize) -> DlcStatus {
    guard(|| write(out, "out", deref(model, "model")?.0.channel_uses()))
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dlc_model_rate(model: *const DlcModel, out: *mut f64) -> DlcStatus {
    guard(|| write(out, "out", deref(model, "model")?.0.rate()))
}

/// Transmit block for message `index`; `out` holds `channel_uses` values.
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn dlc_model_transmit(
    model: *const DlcModel,
    index: usize,
    out: *mut f64,
    len: usize,
) -> DlcStatus {
    guard(|| {
        let model = &deref(model, "model")?.0;
        let x = model.transmit(message(model.codebook(), index)?)?;
        copy_out(&x, slice_mut(out, len, "out")?)
    })
}

/// Receiver probabilities for a channel output `y`; `out` holds `size`
/// values.
///
/// # Safety
/// `y` must point to `y_len` doubles and `out` to `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn dlc_model_receive(
    model: *const DlcModel,
    y: *const f64,
    y_len: usize,
    out: *mut f64,
    out_len: usize,
) -> DlcStatus {
    guard(|| {
        let model = &deref(model, "model")?.0;
        let p = model.receive(slice(y, y_len, "y")?)?;
        copy_out(&p, slice_mut(out, out_len, "out")?)
    })
}

/// Full receive-and-decide for a channel output `y`.
///
/// # Safety
/// `y` must point to `y_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn dlc_model_decode(
    model: *const DlcModel,
    y: *const f64,
    y_len: usize,
    out_index: *mut usize,
) -> DlcStatus {
    guard(|| {
        let model = &deref(model, "model")?.0;
        let p = model.receive(slice(y, y_len, "y")?)?;
        write(out_index, "out_index", model.decode(&p)?.0)
    })
}

fn spec_at(model: &Autoencoder, axis: DlcAxis, point: f64) -> dlcomm::Result<ChannelSpec> {
    let (n, rate) = (model.channel_uses(), model.rate());
    match axis {
        DlcAxis::EbN0Db => ChannelSpec::from_ebn0(n, rate, point),
        DlcAxis::SnrDb => ChannelSpec::from_snr_db(n, rate, point),
    }
}

/// Monte-Carlo block and bit error rates over `blocks` uniform messages.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dlc_model_estimate(
    model: *const DlcModel,
    axis: DlcAxis,
    point: f64,
    blocks: u64,
    seed: u64,
    out: *mut DlcMetrics,
) -> DlcStatus {
    guard(|| {
        let model = &deref(model, "model")?.0;
        let spec = spec_at(model, axis, point)?;
        let mut record = estimate_bler(model, &spec, blocks, &mut seeded(seed))?;
        if axis == DlcAxis::EbN0Db {
            record.axis = AxisKind::EbN0Db;
            record.snr_point = point;
        }
        write(out, "out", DlcMetrics::from(&record))
    })
}

/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn dlc_baseline_estimate(
    scheme: DlcBaseline,
    axis: DlcAxis,
    point: f64,
    blocks: u64,
    seed: u64,
    out: *mut DlcMetrics,
) -> DlcStatus {
    guard(|| {
        let scheme = match scheme {
            DlcBaseline::HammingHd => BaselineScheme::HammingHd,
            DlcBaseline::HammingMl => BaselineScheme::HammingMl,
            DlcBaseline::UncodedBpsk => BaselineScheme::UncodedBpsk,
        };
        let kind = match axis {
            DlcAxis::EbN0Db => AxisKind::EbN0Db,
            DlcAxis::SnrDb => AxisKind::SnrDb,
        };
        let record = estimate_baseline(scheme, kind, point, blocks, &mut seeded(seed))?;
        write(out, "out", DlcMetrics::from(&record))
    })
}

unsafe fn bits<const N: usize>(p: *const u8, name: &'static str) -> Result<[u8; N], Failure> {
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    let mut b = [0u8; N];
    b.copy_from_slice(std::slice::from_raw_parts(p, N));
    if b.iter().any(|&v| v > 1) {
        return Err(Error::domain(format!("`{name}` must contain only 0 and 1")).into());
    }
    Ok(b)
}

/// Hamming(7,4) encoding of 4 data bits into 7 code bits.
///
/// # Safety
/// `data` must hold 4 bytes and `code` 7 bytes.
#[no_mangle]
pub unsafe extern "C" fn dlc_hamming_encode(data: *const u8, code: *mut u8) -> DlcStatus {
    guard(|| {
        let c = baseline::hamming_encode(&bits::<4>(data, "data")?);
        slice_mut(code, 7, "code")?.copy_from_slice(&c);
        Ok(())
    })
}

/// Hard-decision syndrome decoding of 7 received bits.
///
/// # Safety
/// `code` must hold 7 bytes and `data` 4 bytes.
#[no_mangle]
pub unsafe extern "C" fn dlc_hamming_decode_hd(code: *const u8, data: *mut u8) -> DlcStatus {
    guard(|| {
        let d = baseline::hamming_decode_hd(&bits::<7>(code, "code")?);
        slice_mut(data, 4, "data")?.copy_from_slice(&d);
        Ok(())
    })
}

/// Maximum-likelihood decoding of 7 received BPSK samples.
///
/// # Safety
/// `y` must hold 7 doubles and `data` 4 bytes.
#[no_mangle]
pub unsafe extern "C" fn dlc_hamming_decode_ml(y: *const f64, data: *mut u8) -> DlcStatus {
    guard(|| {
        let mut samples = [0.0; 7];
        samples.copy_from_slice(slice(y, 7, "y")?);
        let d = baseline::hamming_decode_ml(&samples);
        slice_mut(data, 4, "data")?.copy_from_slice(&d);
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn last_error() -> String {
        unsafe { CStr::from_ptr(dlc_last_error()) }
            .to_string_lossy()
            .into_owned()
    }

    #[test]
    fn codebook_roundtrip() {
        unsafe {
            let mut cb = ptr::null_mut();
            assert_eq!(dlc_codebook_new(16, 6, &mut cb), DlcStatus::Ok);
            let (mut len, mut bits) = (0usize, 0u32);
            assert_eq!(dlc_codebook_len(cb, &mut len), DlcStatus::Ok);
            assert_eq!(dlc_codebook_bits(cb, &mut bits), DlcStatus::Ok);
            assert_eq!((len, bits), (4096, 12));
            let mut entry = [0.0; 16];
            for index in [0, 17, 4095] {
                assert_eq!(dlc_codebook_entry(cb, index, entry.as_mut_ptr(), 16), DlcStatus::Ok);
                let mut decoded = usize::MAX;
                assert_eq!(dlc_codebook_decode(cb, entry.as_ptr(), 16, &mut decoded), DlcStatus::Ok);
                assert_eq!(decoded, index);
            }
            let mut rate = 0.0;
            assert_eq!(dlc_data_rate(cb, 7, &mut rate), DlcStatus::Ok);
            assert!((rate - 12.0 / 7.0).abs() < 1e-12);
            dlc_codebook_free(cb);
        }
    }

    #[test]
    fn errors_carry_codes_and_messages() {
        unsafe {
            let mut cb = ptr::null_mut();
            assert_eq!(dlc_codebook_new(8, 5, &mut cb), DlcStatus::Domain);
            assert!(cb.is_null());
            assert!(!last_error().is_empty());

            assert_eq!(dlc_codebook_len(ptr::null(), &mut 0), DlcStatus::NullPointer);
            assert!(last_error().contains("codebook"));

            assert_eq!(dlc_codebook_new(8, 1, &mut cb), DlcStatus::Ok);
            assert!(last_error().is_empty());
            let mut short = [0.0; 3];
            assert_eq!(dlc_codebook_entry(cb, 0, short.as_mut_ptr(), 3), DlcStatus::Shape);
            assert_eq!(dlc_codebook_entry(cb, 8, short.as_mut_ptr(), 3), DlcStatus::Domain);
            dlc_codebook_free(cb);

            let mut model = ptr::null_mut();
            let bad = CString::new("/nonexistent/dir/model.ckpt").unwrap();
            assert_eq!(dlc_model_load(bad.as_ptr(), &mut model), DlcStatus::Io);
        }
    }

    #[test]
    fn scalar_helpers() {
        let c = dlc_param_counts(16, 7);
        assert_eq!(c.total, (2 * 16 + 3) * (16 + 7));
        assert!((dlc_sigma2_from_snr_db(10.0) - 0.1).abs() < 1e-15);
        let mut s = 0.0;
        unsafe {
            assert_eq!(dlc_sigma2_from_ebn0(0.5, 0.0, &mut s), DlcStatus::Ok);
            assert!((s - 1.0).abs() < 1e-15);
            assert_eq!(dlc_sigma2_from_ebn0(0.0, 0.0, &mut s), DlcStatus::Domain);
            let mut r = 0.0;
            assert_eq!(dlc_achievable_rate(16, 6, 7, 5.0, &mut r), DlcStatus::Ok);
            assert!(r > 0.0);
        }
        let v = unsafe { CStr::from_ptr(dlc_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }

    #[test]
    fn model_train_save_load_and_estimate() {
        let dir = tempfile::tempdir().unwrap();
        let file = CString::new(dir.path().join("m.ckpt").to_str().unwrap()).unwrap();
        unsafe {
            let mut model = ptr::null_mut();
            assert_eq!(dlc_model_new(4, 1, 7, 3, &mut model), DlcStatus::Ok);
            let mut opts = dlc_train_options_default();
            opts.epochs = 5;
            opts.train_samples = 2000;
            let set = [5.0, 10.0];
            opts.snr_set = set.as_ptr();
            opts.snr_set_len = set.len();
            let mut loss = f64::NAN;
            assert_eq!(dlc_model_train(model, &opts, &mut loss), DlcStatus::Ok);
            assert!(loss.is_finite() && loss >= 0.0);

            let mut x = [0.0; 7];
            assert_eq!(dlc_model_transmit(model, 2, x.as_mut_ptr(), 7), DlcStatus::Ok);
            let norm2: f64 = x.iter().map(|v| v * v).sum();
            assert!((norm2 - 7.0).abs() < 1e-9);
            let mut index = usize::MAX;
            assert_eq!(dlc_model_decode(model, x.as_ptr(), 7, &mut index), DlcStatus::Ok);
            assert_eq!(index, 2);
            let mut p = [0.0; 4];
            assert_eq!(
                dlc_model_receive(model, x.as_ptr(), 7, p.as_mut_ptr(), 4),
                DlcStatus::Ok
            );
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);

            assert_eq!(dlc_model_save(model, file.as_ptr()), DlcStatus::Ok);
            let mut loaded = ptr::null_mut();
            assert_eq!(dlc_model_load(file.as_ptr(), &mut loaded), DlcStatus::Ok);
            let mut y = [0.0; 7];
            assert_eq!(dlc_model_transmit(loaded, 2, y.as_mut_ptr(), 7), DlcStatus::Ok);
            assert_eq!(x, y);

            let mut a = DlcMetrics::default();
            let mut b = DlcMetrics::default();
            assert_eq!(
                dlc_model_estimate(model, DlcAxis::SnrDb, 0.0, 2000, 9, &mut a),
                DlcStatus::Ok
            );
            assert_eq!(
                dlc_model_estimate(loaded, DlcAxis::SnrDb, 0.0, 2000, 9, &mut b),
                DlcStatus::Ok
            );
            assert_eq!(a, b);
            assert_eq!(a.blocks, 2000);
            assert!(a.ber <= a.bler);

            dlc_model_free(model);
            dlc_model_free(loaded);
        }
    }

    #[test]
    fn hamming_roundtrip() {
        for index in 0..16 {
            let data = baseline::message_bits(index);
            let mut code = [0u8; 7];
            let mut back = [9u8; 4];
            unsafe {
                assert_eq!(dlc_hamming_encode(data.as_ptr(), code.as_mut_ptr()), DlcStatus::Ok);
                code[index % 7] ^= 1;
                assert_eq!(dlc_hamming_decode_hd(code.as_ptr(), back.as_mut_ptr()), DlcStatus::Ok);
                assert_eq!(back, data);
                code[index % 7] ^= 1;
                let y: Vec<f64> = code.iter().map(|&b| if b == 1 { -1.0 } else { 1.0 }).collect();
                assert_eq!(dlc_hamming_decode_ml(y.as_ptr(), back.as_mut_ptr()), DlcStatus::Ok);
                assert_eq!(back, data);
            }
        }
        let bad = [0u8, 2, 0, 1];
        let mut code = [0u8; 7];
        assert_eq!(
            unsafe { dlc_hamming_encode(bad.as_ptr(), code.as_mut_ptr()) },
            DlcStatus::Domain
        );
    }

    #[test]
    fn baseline_estimate_matches_bpsk_theory() {
        let mut m = DlcMetrics::default();
        let status =
            unsafe { dlc_baseline_estimate(DlcBaseline::UncodedBpsk, DlcAxis::EbN0Db, 4.0, 50_000, 1, &mut m) };
        assert_eq!(status, DlcStatus::Ok);
        assert!((m.ber - 0.0125).abs() < 0.002, "ber {}", m.ber);
    }
}
