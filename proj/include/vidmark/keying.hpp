#ifndef VIDMARK_KEYING_HPP
#define VIDMARK_KEYING_HPP

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vidmark {

// Deterministic key material derived from a passphrase. Not a KDF:
// FNV-1a offers no cryptographic strength, only reproducible obscurity.
struct KeyMaterial {
    uint64_t seed = 0;
    uint32_t check_tag = 0;

    bool operator==(const KeyMaterial&) const = default;
};

// Key-driven choice of host frames, one per stratum of the video.
struct SelectionPlan {
    std::vector<int> frame_indices;  // strictly increasing
    int total_frames = 0;
};

// Extraction attempt ledger for one asset.
struct TrialState {
    std::string asset_id;
    int failures = 0;
    bool locked = false;

    bool operator==(const TrialState&) const = default;
};

inline constexpr int kMaxTrialFailures = 3;

// FNV-1a-64 over the passphrase bytes; check_tag is the low 32 bits of the
// first splitmix64 output from that seed.
KeyMaterial derive_key(std::string_view passphrase);

uint64_t fnv1a64(std::string_view bytes);

// splitmix64 step: advances state and returns the mixed output.
uint64_t prng_next(uint64_t& state);

// Uniform double in [0, 1) from one prng draw.
double prng_uniform(uint64_t& state);

// Picks m frames from [0, total_frames): the video is split into m
// near-equal contiguous strata and one frame is drawn per stratum.
SelectionPlan select_frames(const KeyMaterial& key, int total_frames, int m);

// Trial state machine: success resets, failure increments, the lock is
// absorbing and engages at kMaxTrialFailures.
TrialState check_trial(TrialState state, bool key_ok);

// Hex digest used as the asset identity in the trial sidecar.
std::string asset_digest(std::span<const uint8_t> bytes);

// ---- trial sidecar persistence ----
// One text line per asset: "<asset_id> <failures> <locked:0|1>".

// Holds an exclusive flock on the trial file for its lifetime, so a
// whole load/attempt/store transaction serializes against concurrent
// extractions. Creates the file on first use.
class TrialFileLock {
public:
    explicit TrialFileLock(const std::string& path);
    ~TrialFileLock();
    TrialFileLock(const TrialFileLock&) = delete;
    TrialFileLock& operator=(const TrialFileLock&) = delete;

    TrialState load(const std::string& asset_id) const;
    void store(const TrialState& state) const;

private:
    int fd_ = -1;
};

// Single-shot convenience wrappers (each takes the lock for one call).
TrialState load_trial_state(const std::string& path, const std::string& asset_id);
void store_trial_state(const std::string& path, const TrialState& state);

} // namespace vidmark

#endif
