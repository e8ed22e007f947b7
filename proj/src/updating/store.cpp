#include "cbf/store.hpp"

#include <bit>
#include <cerrno>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

#include <fcntl.h>
#include <signal.h>
#include <unistd.h>

#include <boost/crc.hpp>
#include <json.hpp>

#include "cbf/error.hpp"

namespace cbf {

namespace {

using Json = nlohmann::json;

constexpr char kMagic[4] = {'C', 'B', 'F', '1'};

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(char((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_u64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(p[i]) << (8 * i);
    return v;
}

void put_matrix(std::string& out, const Matrix& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) put_u64(out, std::bit_cast<std::uint64_t>(m.data()[i]));
}

class Reader {
public:
    Reader(const unsigned char* p, std::size_t size) : p_(p), size_(size) {}

    double f64() {
        if (pos_ + 8 > size_) fail(Errc::ChecksumMismatch, "store payload is shorter than its header declares");
        const double v = std::bit_cast<double>(get_u64(p_ + pos_));
        pos_ += 8;
        return v;
    }

    Matrix matrix(Eigen::Index rows, Eigen::Index cols) {
        Matrix m(rows, cols);
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = f64();
        return m;
    }

    bool done() const { return pos_ == size_; }

private:
    const unsigned char* p_;
    std::size_t size_;
    std::size_t pos_ = 0;
};

Json header_of(const Store& s) {
    const auto& d = s.descriptor;
    return Json{{"format_version", kStoreVersion},
                {"J", d.J},
                {"L", d.L},
                {"P", d.P},
                {"group_labels", d.group_labels},
                {"covariate_names", d.covariate_names},
                {"outcome_names", d.outcome_names},
                {"created", s.created},
                {"updated", s.updated}};
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::Io, "cannot open store '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool pid_alive(long pid) {
    if (pid <= 0) return false;
    return ::kill(pid_t(pid), 0) == 0 || errno == EPERM;
}

} // namespace

std::uint64_t crc64(const unsigned char* data, std::size_t size) {
    boost::crc_optimal<64, 0x42F0E1EBA9EA3693ULL, ~0ULL, ~0ULL, true, true> crc;
    crc.process_bytes(data, size);
    return crc.checksum();
}

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void save(const Store& store, const std::filesystem::path& path) {
    const auto& d = store.descriptor;
    const auto& st = store.stats;
    if (st.J != d.J || st.L != d.L || st.P != d.P || int(st.groups.size()) != d.J) {
        fail(Errc::SchemaMismatch, "statistics do not match the store descriptor");
    }
    const std::string header = header_of(store).dump();
    std::string out(kMagic, 4);
    put_u64(out, header.size());
    out += header;
    for (const auto& g : st.groups) {
        put_u64(out, std::bit_cast<std::uint64_t>(g.n));
        put_matrix(out, g.xtx);
        put_matrix(out, g.xty);
        put_matrix(out, g.yty);
    }
    put_u64(out, crc64(reinterpret_cast<const unsigned char*>(out.data()), out.size()));

    std::filesystem::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (fd < 0) fail(Errc::Io, "cannot write '" + tmp.string() + "': " + std::strerror(errno));
    std::size_t written = 0;
    while (written < out.size()) {
        const ssize_t w = ::write(fd, out.data() + written, out.size() - written);
        if (w < 0) {
            if (errno == EINTR) continue;
            ::close(fd);
            ::unlink(tmp.c_str());
            fail(Errc::Io, "write to '" + tmp.string() + "' failed");
        }
        written += std::size_t(w);
    }
    ::fsync(fd);
    ::close(fd);
    if (::rename(tmp.c_str(), path.c_str()) != 0) {
        ::unlink(tmp.c_str());
        fail(Errc::Io, "cannot replace '" + path.string() + "': " + std::strerror(errno));
    }
}

Store load(const std::filesystem::path& path) {
    const std::string raw = read_file(path);
    const auto* bytes = reinterpret_cast<const unsigned char*>(raw.data());
    if (raw.size() < 4 + 8 + 8) fail(Errc::ChecksumMismatch, "store '" + path.string() + "' is truncated");
    const std::size_t body = raw.size() - 8;
    if (crc64(bytes, body) != get_u64(bytes + body)) {
        fail(Errc::ChecksumMismatch, "store '" + path.string() + "' failed its checksum");
    }
    if (std::memcmp(bytes, kMagic, 3) != 0) fail(Errc::Io, "'" + path.string() + "' is not a statistics store");
    if (bytes[3] != kMagic[3]) fail(Errc::VersionUnsupported, "unsupported store format '" + raw.substr(0, 4) + "'");
    const std::uint64_t hlen = get_u64(bytes + 4);
    if (hlen > body - 12) fail(Errc::ChecksumMismatch, "store header length exceeds the file");
    Json h;
    try {
        h = Json::parse(raw.substr(12, hlen));
    } catch (const std::exception& e) {
        fail(Errc::ChecksumMismatch, std::string("store header is not valid JSON: ") + e.what());
    }
    Store s;
    try {
        if (h.at("format_version").get<int>() != kStoreVersion) {
            fail(Errc::VersionUnsupported, "store format version " + h.at("format_version").dump() + " is not supported");
        }
        auto& d = s.descriptor;
        d.J = h.at("J").get<int>();
        d.L = h.at("L").get<int>();
        d.P = h.at("P").get<int>();
        d.group_labels = h.at("group_labels").get<std::vector<std::string>>();
        d.covariate_names = h.at("covariate_names").get<std::vector<std::string>>();
        d.outcome_names = h.at("outcome_names").get<std::vector<std::string>>();
        s.created = h.value("created", "");
        s.updated = h.value("updated", "");
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::VersionUnsupported, std::string("store header lacks required fields: ") + e.what());
    }
    const auto& d = s.descriptor;
    if (d.J < 1 || d.L < 0 || d.P < 1) fail(Errc::SchemaMismatch, "store header declares an invalid shape");
    s.stats = SufficientStats::zeros(d.J, d.L, d.P);
    Reader r(bytes + 12 + hlen, body - 12 - hlen);
    const int K = d.J + d.L;
    for (auto& g : s.stats.groups) {
        g.n = r.f64();
        g.xtx = r.matrix(K, K);
        g.xty = r.matrix(K, d.P);
        g.yty = r.matrix(d.P, d.P);
    }
    if (!r.done()) fail(Errc::ChecksumMismatch, "store payload is longer than its header declares");
    return s;
}

Store load(const std::filesystem::path& path, const StoreDescriptor& expected) {
    Store s = load(path);
    const auto& d = s.descriptor;
    if (d.J != expected.J || d.L != expected.L || d.P != expected.P) {
        fail(Errc::SchemaMismatch, "store frame (J=" + std::to_string(d.J) + ", L=" + std::to_string(d.L) +
                                       ", P=" + std::to_string(d.P) + ") differs from the configured frame (J=" +
                                       std::to_string(expected.J) + ", L=" + std::to_string(expected.L) +
                                       ", P=" + std::to_string(expected.P) + ")");
    }
    auto names_differ = [](const std::vector<std::string>& a, const std::vector<std::string>& b) {
        return !a.empty() && !b.empty() && a != b;
    };
    if (names_differ(d.group_labels, expected.group_labels) || names_differ(d.covariate_names, expected.covariate_names) ||
        names_differ(d.outcome_names, expected.outcome_names)) {
        fail(Errc::SchemaMismatch, "store column names or group labels differ from the configuration");
    }
    return s;
}

SufficientStats merge(const SufficientStats& old, const DataBatch& batch) {
    if (batch.rows() == 0) return old;
    if (batch.y.cols() != old.P || batch.w.cols() != old.L) {
        fail(Errc::SchemaMismatch, "new batch has " + std::to_string(batch.y.cols()) + " outcomes and " +
                                       std::to_string(batch.w.cols()) + " covariates; store expects " +
                                       std::to_string(old.P) + " and " + std::to_string(old.L));
    }
    for (int g : batch.group) {
        if (g < 0 || g >= old.J) fail(Errc::UnknownGroup, "new batch refers to a group the store does not have");
    }
    SufficientStats out = old;
    if (batch.groups == old.J) {
        out += sufficient_stats(batch);
    } else {
        DataBatch b = batch;
        b.groups = old.J;
        out += sufficient_stats(b);
    }
    return out;
}

StoreLock::StoreLock(const std::filesystem::path& store_path) : lock_(store_path) {
    lock_ += ".lock";
    const int fd = ::open(lock_.c_str(), O_WRONLY | O_CREAT | O_EXCL, 0644);
    if (fd < 0) {
        if (errno != EEXIST) fail(Errc::Io, "cannot create lock '" + lock_.string() + "': " + std::strerror(errno));
        long pid = 0;
        std::ifstream in(lock_);
        in >> pid;
        if (pid_alive(pid)) {
            fail(Errc::LockHeld, "store is locked by running process " + std::to_string(pid));
        }
        fail(Errc::StaleLock, "stale lock '" + lock_.string() + "' left by process " + std::to_string(pid) +
                                  "; remove it after checking no writer is active");
    }
    const std::string pid = std::to_string(::getpid()) + "\n";
    if (::write(fd, pid.data(), pid.size()) < 0) {
        ::close(fd);
        ::unlink(lock_.c_str());
        fail(Errc::Io, "cannot write lock '" + lock_.string() + "'");
    }
    ::close(fd);
}

StoreLock::~StoreLock() { ::unlink(lock_.c_str()); }

} // namespace cbf
