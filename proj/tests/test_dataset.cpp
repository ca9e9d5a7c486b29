#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "support.hpp"
#include "uwiq/dataset.hpp"
#include "uwiq/image.hpp"

using namespace uwiq;

namespace {

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    REQUIRE(f.good());
    f << text;
}

// three-entry fixture: e2 has no lq, images 8x8
testsup::TempDir make_fixture() {
    testsup::TempDir tmp("manifest");
    Rng rng(77);
    for (const char* id : {"e1", "e2", "e3"}) {
        save_image(testsup::random_image(rng, 8, 8), tmp.file(std::string(id) + "_raw.png"));
        save_image(testsup::random_image(rng, 8, 8), tmp.file(std::string(id) + "_hq.png"));
        if (std::string(id) != "e2") {
            save_image(testsup::random_image(rng, 8, 8), tmp.file(std::string(id) + "_lq.png"));
        }
    }
    write_file(tmp.file("m.csv"),
               "id,raw,hq,lq\n"
               "e1,e1_raw.png,e1_hq.png,e1_lq.png\n"
               "e2,e2_raw.png,e2_hq.png,\n"
               "e3,e3_raw.png,e3_hq.png,e3_lq.png\n");
    return tmp;
}

}  // namespace

TEST_CASE("load_manifest: order, optional lq, path resolution") {
    const testsup::TempDir tmp = make_fixture();
    const auto entries = load_manifest(tmp.file("m.csv"));
    REQUIRE(entries.size() == 3);
    CHECK(entries[0].id == "e1");
    CHECK(entries[1].id == "e2");
    CHECK(entries[2].id == "e3");
    CHECK(entries[0].lq_path.has_value());
    CHECK_FALSE(entries[1].lq_path.has_value());
    // resolved relative to the manifest directory
    CHECK(entries[0].raw_path == tmp.file("e1_raw.png"));
    CHECK_NOTHROW(load_image(entries[0].raw_path));
}

TEST_CASE("load_manifest errors") {
    testsup::TempDir tmp("manifest_err");
    CHECK_THROWS_AS(load_manifest(tmp.file("missing.csv")), std::runtime_error);

    write_file(tmp.file("hdr.csv"), "identifier,raw,hq,lq\n");
    CHECK_THROWS_AS(load_manifest(tmp.file("hdr.csv")), std::runtime_error);

    write_file(tmp.file("row.csv"), "id,raw,hq,lq\nonly,two.png\n");
    CHECK_THROWS_AS(load_manifest(tmp.file("row.csv")), std::runtime_error);

    write_file(tmp.file("dup.csv"),
               "id,raw,hq,lq\nx,a.png,b.png,\nx,c.png,d.png,\n");
    try {
        load_manifest(tmp.file("dup.csv"));
        FAIL("expected duplicate-id error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("x") != std::string::npos);
        CHECK(std::string(e.what()).find("duplicate") != std::string::npos);
    }
}

TEST_CASE("validate_manifest: clean fixture passes") {
    const testsup::TempDir tmp = make_fixture();
    const auto entries = load_manifest(tmp.file("m.csv"));
    const ValidationReport rep = validate_manifest(entries);
    CHECK(rep.checked == 3);
    CHECK(rep.ok());
}

TEST_CASE("validate_manifest: missing file and dimension mismatch reported") {
    const testsup::TempDir tmp = make_fixture();
    Rng rng(78);
    // break e1: drop hq; break e3: wrong-size lq
    std::filesystem::remove(tmp.file("e1_hq.png"));
    save_image(testsup::random_image(rng, 9, 8), tmp.file("e3_lq.png"));

    const auto entries = load_manifest(tmp.file("m.csv"));
    const ValidationReport rep = validate_manifest(entries);
    REQUIRE(rep.failures.size() == 2);
    CHECK(rep.failures[0].id == "e1");
    CHECK(rep.failures[0].what.find("e1_hq.png") != std::string::npos);
    CHECK(rep.failures[1].id == "e3");
    CHECK(rep.failures[1].what.find("dimensions") != std::string::npos);
}

TEST_CASE("split: prefix semantics, lq exclusion, edge cases") {
    const testsup::TempDir tmp = make_fixture();
    const auto entries = load_manifest(tmp.file("m.csv"));

    const SplitResult sp = split(entries, SplitSpec{2});
    REQUIRE(sp.train.size() == 1);  // e2 lacks lq
    CHECK(sp.train[0].id == "e1");
    REQUIRE(sp.excluded_train_ids.size() == 1);
    CHECK(sp.excluded_train_ids[0] == "e2");
    REQUIRE(sp.test.size() == 1);
    CHECK(sp.test[0].id == "e3");

    const SplitResult all = split(entries, SplitSpec{3});
    CHECK(all.test.empty());
    CHECK(all.train.size() == 2);

    const SplitResult none = split(entries, SplitSpec{0});
    CHECK(none.train.empty());
    CHECK(none.test.size() == 3);

    CHECK_THROWS_AS(split(entries, SplitSpec{4}), std::invalid_argument);
}

TEST_CASE("split is deterministic and partitions the usable entries") {
    const testsup::TempDir tmp = make_fixture();
    const auto entries = load_manifest(tmp.file("m.csv"));
    const SplitResult a = split(entries, SplitSpec{2});
    const SplitResult b = split(entries, SplitSpec{2});
    REQUIRE(a.train.size() == b.train.size());
    for (std::size_t i = 0; i < a.train.size(); ++i) CHECK(a.train[i].id == b.train[i].id);
    // no id appears in both halves
    for (const auto& tr : a.train) {
        for (const auto& te : a.test) CHECK(tr.id != te.id);
    }
}
