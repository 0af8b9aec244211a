#include "vidmark/keying.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <sstream>

#include "vidmark/error.hpp"

namespace vidmark {

uint64_t fnv1a64(std::string_view bytes) {
    uint64_t hash = 0xcbf29ce484222325ull;
    for (unsigned char b : bytes) {
        hash ^= b;
        hash *= 0x100000001b3ull;
    }
    return hash;
}

uint64_t prng_next(uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double prng_uniform(uint64_t& state) {
    return static_cast<double>(prng_next(state) >> 11) * 0x1.0p-53;
}

KeyMaterial derive_key(std::string_view passphrase) {
    KeyMaterial key;
    key.seed = fnv1a64(passphrase);
    uint64_t state = key.seed;
    key.check_tag = static_cast<uint32_t>(prng_next(state));
    return key;
}

SelectionPlan select_frames(const KeyMaterial& key, int total_frames, int m) {
    if (m < 1 || m > total_frames)
        raise(ErrorCode::Parameter,
              "cannot select " + std::to_string(m) + " of " +
                  std::to_string(total_frames) + " frames");
    SelectionPlan plan;
    plan.total_frames = total_frames;
    plan.frame_indices.reserve(m);
    uint64_t state = key.seed;
    for (int i = 0; i < m; i++) {
        int lo = static_cast<int>(static_cast<int64_t>(i) * total_frames / m);
        int hi = static_cast<int>(static_cast<int64_t>(i + 1) * total_frames / m);
        uint64_t draw = prng_next(state);
        plan.frame_indices.push_back(lo + static_cast<int>(draw % (hi - lo)));
    }
    return plan;
}

TrialState check_trial(TrialState state, bool key_ok) {
    if (state.locked) return state;
    if (key_ok) {
        state.failures = 0;
    } else {
        state.failures++;
        if (state.failures >= kMaxTrialFailures) {
            state.failures = kMaxTrialFailures;
            state.locked = true;
        }
    }
    return state;
}

std::string asset_digest(std::span<const uint8_t> bytes) {
    uint64_t hash =
        fnv1a64(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

namespace {

struct TrialLine {
    std::string asset_id;
    int failures = 0;
    bool locked = false;
};

std::vector<TrialLine> parse_trial_lines(const std::string& text) {
    std::vector<TrialLine> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream fields(line);
        TrialLine entry;
        int locked = 0;
        if (fields >> entry.asset_id >> entry.failures >> locked) {
            entry.locked = locked != 0;
            lines.push_back(entry);
        }
    }
    return lines;
}

std::string read_all(int fd) {
    std::string text;
    char buf[4096];
    ::lseek(fd, 0, SEEK_SET);
    ssize_t n;
    while ((n = ::read(fd, buf, sizeof buf)) > 0) text.append(buf, n);
    return text;
}

void replace_with(int fd, const std::string& text) {
    if (::ftruncate(fd, 0) != 0)
        raise(ErrorCode::Io, "cannot truncate trial file");
    ::lseek(fd, 0, SEEK_SET);
    size_t written = 0;
    while (written < text.size()) {
        ssize_t n = ::write(fd, text.data() + written, text.size() - written);
        if (n <= 0) raise(ErrorCode::Io, "cannot write trial file");
        written += n;
    }
}

} // namespace

TrialFileLock::TrialFileLock(const std::string& path) {
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT, 0644);
    if (fd_ < 0)
        raise(ErrorCode::Io,
              "cannot open trial file '" + path + "': " + std::strerror(errno));
    if (::flock(fd_, LOCK_EX) != 0) {
        ::close(fd_);
        raise(ErrorCode::Io, "cannot lock trial file '" + path + "'");
    }
}

TrialFileLock::~TrialFileLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
}

TrialState TrialFileLock::load(const std::string& asset_id) const {
    for (const TrialLine& line : parse_trial_lines(read_all(fd_)))
        if (line.asset_id == asset_id)
            return TrialState{line.asset_id, line.failures, line.locked};
    return TrialState{asset_id, 0, false};
}

void TrialFileLock::store(const TrialState& state) const {
    auto lines = parse_trial_lines(read_all(fd_));
    bool found = false;
    for (TrialLine& line : lines)
        if (line.asset_id == state.asset_id) {
            line.failures = state.failures;
            line.locked = state.locked;
            found = true;
        }
    if (!found) lines.push_back({state.asset_id, state.failures, state.locked});

    std::string text;
    for (const TrialLine& line : lines)
        text += line.asset_id + " " + std::to_string(line.failures) + " " +
                (line.locked ? "1" : "0") + "\n";
    replace_with(fd_, text);
}

TrialState load_trial_state(const std::string& path, const std::string& asset_id) {
    return TrialFileLock(path).load(asset_id);
}

void store_trial_state(const std::string& path, const TrialState& state) {
    TrialFileLock(path).store(state);
}

} // namespace vidmark
