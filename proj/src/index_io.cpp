#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "ragmt/checksum.hpp"
#include "ragmt/error.hpp"
#include "ragmt/retrieval.hpp"

namespace ragmt {
namespace {

constexpr char kFormatName[] = "ragmt-index";
constexpr char kPostingsMagic[8] = {'R', 'G', 'M', 'T', 'P', 'S', 'T', '\0'};
constexpr char kManifestFile[] = "manifest.json";
constexpr char kPostingsFile[] = "postings.bin";
constexpr char kStoreFile[] = "store.jsonl";

void put_u32(std::string& out, std::uint32_t value)
{
    for (int shift = 0; shift < 32; shift += 8)
        out.push_back(static_cast<char>((value >> shift) & 0xFF));
}

void put_bytes(std::string& out, std::string_view bytes)
{
    put_u32(out, static_cast<std::uint32_t>(bytes.size()));
    out.append(bytes);
}

/// Bounds-checked little-endian reader over an in-memory file.
class Reader {
  public:
    explicit Reader(std::string_view data) : data_(data) {}

    std::uint32_t u32()
    {
        need(4);
        std::uint32_t value = 0;
        for (int i = 0; i < 4; ++i)
            value |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        pos_ += 4;
        return value;
    }

    std::string_view bytes(std::size_t size)
    {
        need(size);
        auto view = data_.substr(pos_, size);
        pos_ += size;
        return view;
    }

    bool at_end() const noexcept { return pos_ == data_.size(); }

  private:
    void need(std::size_t size) const
    {
        if (data_.size() - pos_ < size)
            throw IndexFormatError("postings file is truncated");
    }

    std::string_view data_;
    std::size_t pos_ = 0;
};

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IndexFormatError("cannot read " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return std::move(buffer).str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes)
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error("cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out)
            throw Error("write failed on " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string encode_postings(const RetrievalIndex& index)
{
    std::string out(kPostingsMagic, sizeof kPostingsMagic);
    put_u32(out, kIndexFormatVersion);
    const auto lens = index.doc_lens();
    put_u32(out, static_cast<std::uint32_t>(lens.size()));
    for (auto len : lens)
        put_u32(out, len);
    const auto terms = index.sorted_terms();
    put_u32(out, static_cast<std::uint32_t>(terms.size()));
    for (const auto& term : terms) {
        put_bytes(out, term);
        const auto list = index.postings(term);
        put_u32(out, static_cast<std::uint32_t>(list.size()));
        for (const auto& posting : list) {
            put_u32(out, posting.doc);
            put_u32(out, posting.tf);
        }
    }
    return out;
}

std::string encode_store(const RetrievalIndex& index)
{
    std::string out;
    const auto store = index.store();
    for (std::size_t doc = 0; doc < store.size(); ++doc) {
        nlohmann::ordered_json line;
        line["doc_id"] = doc;
        line["id"] = store[doc].id;
        line["src_text"] = store[doc].src_text;
        line["tgt_text"] = store[doc].tgt_text;
        line["domain"] = domain_tag(store[doc].domain);
        out += line.dump();
        out += '\n';
    }
    return out;
}

void check_file(const nlohmann::json& entry, const std::string& bytes, const char* name)
{
    if (entry.at("bytes").get<std::uint64_t>() != bytes.size())
        throw IndexFormatError(std::string(name) + ": size mismatch (truncated or modified)");
    if (entry.at("sha256").get<std::string>() != sha256_hex(bytes))
        throw IndexFormatError(std::string(name) + ": checksum mismatch");
}

}  // namespace

void save_index(const RetrievalIndex& index, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    const std::string postings = encode_postings(index);
    const std::string store = encode_store(index);

    nlohmann::ordered_json manifest;
    manifest["format"] = kFormatName;
    manifest["version"] = kIndexFormatVersion;
    manifest["analyzer_version"] = kAnalyzerVersion;
    manifest["lang"] = index.lang().to_string();
    manifest["domain"] = domain_tag(index.domain());
    manifest["params"] = {{"k1", index.params().k1}, {"b", index.params().b}};
    manifest["n_docs"] = index.n_docs();
    manifest["total_doc_len"] = index.total_doc_len();
    manifest["avg_doc_len"] = index.avg_doc_len();
    manifest["vocabulary_size"] = index.vocabulary_size();
    manifest["files"] = {
        {"postings", {{"name", kPostingsFile}, {"bytes", postings.size()}, {"sha256", sha256_hex(postings)}}},
        {"store", {{"name", kStoreFile}, {"bytes", store.size()}, {"sha256", sha256_hex(store)}}},
    };

    write_file_atomic(dir / kPostingsFile, postings);
    write_file_atomic(dir / kStoreFile, store);
    write_file_atomic(dir / kManifestFile, manifest.dump(2) + "\n");
}

RetrievalIndex load_index(const std::filesystem::path& dir)
{
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(read_file(dir / kManifestFile));
    } catch (const nlohmann::json::exception& e) {
        throw IndexFormatError("manifest is not valid JSON: " + std::string(e.what()));
    }

    try {
        if (manifest.at("format").get<std::string>() != kFormatName)
            throw IndexFormatError("not a ragmt index directory: " + dir.string());
        const auto version = manifest.at("version").get<std::uint32_t>();
        if (version != kIndexFormatVersion)
            throw IndexFormatError("index format version mismatch: found " + std::to_string(version) +
                                   ", expected " + std::to_string(kIndexFormatVersion));
        if (manifest.at("analyzer_version").get<int>() != kAnalyzerVersion)
            throw IndexFormatError("analyzer version mismatch; rebuild the index");

        const auto lang = LanguagePair::parse(manifest.at("lang").get<std::string>());
        const Domain domain = parse_domain(manifest.at("domain").get<std::string>());
        Bm25Params params{manifest.at("params").at("k1").get<double>(),
                          manifest.at("params").at("b").get<double>()};
        const auto n_docs = manifest.at("n_docs").get<std::size_t>();

        const std::string postings_bytes = read_file(dir / kPostingsFile);
        check_file(manifest.at("files").at("postings"), postings_bytes, kPostingsFile);
        const std::string store_bytes = read_file(dir / kStoreFile);
        check_file(manifest.at("files").at("store"), store_bytes, kStoreFile);

        RetrievalIndex index(lang, domain, params);

        Reader reader(postings_bytes);
        if (std::memcmp(reader.bytes(sizeof kPostingsMagic).data(), kPostingsMagic,
                        sizeof kPostingsMagic) != 0)
            throw IndexFormatError("postings file has a bad magic number");
        if (reader.u32() != kIndexFormatVersion)
            throw IndexFormatError("postings file version mismatch");
        const std::uint32_t doc_count = reader.u32();
        if (doc_count != n_docs)
            throw IndexFormatError("postings document count disagrees with manifest");
        index.doc_len_.reserve(doc_count);
        for (std::uint32_t i = 0; i < doc_count; ++i) {
            index.doc_len_.push_back(reader.u32());
            index.total_len_ += index.doc_len_.back();
        }
        std::vector<std::uint64_t> recount(doc_count, 0);
        const std::uint32_t term_count = reader.u32();
        for (std::uint32_t t = 0; t < term_count; ++t) {
            std::string term(reader.bytes(reader.u32()));
            const std::uint32_t list_size = reader.u32();
            std::vector<Posting> list;
            list.reserve(list_size);
            for (std::uint32_t p = 0; p < list_size; ++p) {
                Posting posting{reader.u32(), reader.u32()};
                if (posting.doc >= doc_count || posting.tf == 0 ||
                    (!list.empty() && list.back().doc >= posting.doc))
                    throw IndexFormatError("postings for '" + term + "' are inconsistent");
                recount[posting.doc] += posting.tf;
                list.push_back(posting);
            }
            if (list.empty() || !index.postings_.emplace(std::move(term), std::move(list)).second)
                throw IndexFormatError("postings file has an empty or duplicate term");
        }
        if (!reader.at_end())
            throw IndexFormatError("postings file has trailing bytes");
        for (std::uint32_t doc = 0; doc < doc_count; ++doc)
            if (recount[doc] != index.doc_len_[doc])
                throw IndexFormatError("document lengths disagree with postings");

        std::istringstream store_stream(store_bytes);
        std::string line;
        while (std::getline(store_stream, line)) {
            const auto record = nlohmann::json::parse(line);
            if (record.at("doc_id").get<std::size_t>() != index.store_.size())
                throw IndexFormatError("store records are out of order");
            BilingualPair pair{record.at("id").get<std::uint32_t>(),
                               record.at("src_text").get<std::string>(),
                               record.at("tgt_text").get<std::string>(),
                               parse_domain(record.at("domain").get<std::string>()), lang};
            if (pair.domain == Domain::TBD || !domain_matches(domain, pair.domain))
                throw IndexFormatError("store record has a domain outside the index domain");
            index.store_.push_back(std::move(pair));
        }
        if (index.store_.size() != doc_count)
            throw IndexFormatError("store size disagrees with manifest");
        return index;
    } catch (const nlohmann::json::exception& e) {
        throw IndexFormatError("malformed index metadata: " + std::string(e.what()));
    } catch (const ConfigError& e) {
        throw IndexFormatError("invalid index metadata: " + std::string(e.what()));
    }
}

}  // namespace ragmt
