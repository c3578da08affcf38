#include "catch_amalgamated.hpp"

#include "apate/vfs.hpp"
#include "test_support.hpp"

using namespace apate;

TEST_CASE("path normalization") {
    CHECK(normalize_path("/") == "/");
    CHECK(normalize_path("//a///b/") == "/a/b");
    CHECK(normalize_path("/a/./b/../c") == "/a/c");
    CHECK(normalize_path("/..") == "/");
    CHECK(normalize_path("/a/b/../../..") == "/");
    CHECK_FALSE(normalize_path("relative").has_value());
    CHECK_FALSE(normalize_path("").has_value());
    CHECK(parent_path("/a") == "/");
    CHECK(parent_path("/a/b/c") == "/a/b");
    CHECK(base_name("/a/b/c") == "c");
}

TEST_CASE("root always exists") {
    VirtualFS fs;
    CHECK(fs.is_directory("/"));
    CHECK(fs.remove_directory("/") == -16);
    CHECK(fs.check_invariants());
}

TEST_CASE("mutators return errno values") {
    VirtualFS fs;
    CHECK(fs.make_directory("/a") == 0);
    CHECK(fs.make_directory("/a") == -17);
    CHECK(fs.make_directory("/x/y") == -2);
    CHECK(fs.create_file("/a/f", "data") == 0);
    CHECK(fs.create_file("/a/f") == -17);
    CHECK(fs.create_file("/a/f/g") == -20);
    CHECK(fs.remove_directory("/a") == -39);
    CHECK(fs.remove_directory("/a/f") == -20);
    CHECK(fs.remove_file("/a") == -21);
    CHECK(fs.remove_file("/a/missing") == -2);
    CHECK(fs.remove_file("/a/f") == 0);
    CHECK(fs.remove_directory("/a") == 0);
    CHECK(fs.remove_directory("/a") == -2);
    CHECK(fs.check_invariants());
}

TEST_CASE("directory listings are sorted and direct only") {
    VirtualFS fs;
    fs.put_file("/d/b", "");
    fs.put_file("/d/a", "");
    fs.put_file("/d/sub/deep", "");
    fs.put_file("/dz", "");
    CHECK(fs.list_directory("/d") == std::vector<std::string>{"a", "b", "sub"});
    CHECK(fs.list_directory("/") == std::vector<std::string>{"d", "dz"});
}

TEST_CASE("digest tracks content and structure") {
    VirtualFS a;
    VirtualFS b;
    CHECK(a.digest() == b.digest());
    a.put_file("/x", "1");
    CHECK(a.digest() != b.digest());
    b.put_file("/x", "2");
    CHECK(a.digest() != b.digest());
    b.put_file("/x", "1");
    CHECK(a.digest() == b.digest());
    CHECK(a.digest().size() == 16);
}

TEST_CASE("manifest examples") {
    auto fs = vfs_from_manifest("D /var/lib/mysql\nF /var/lib/mysql/ibdata1 16 00\n");
    CHECK(fs.is_directory("/var/lib/mysql"));
    REQUIRE(fs.file_content("/var/lib/mysql/ibdata1") != nullptr);
    CHECK(*fs.file_content("/var/lib/mysql/ibdata1") == std::string(16, '\0'));

    auto honey = vfs_from_manifest("F /honey/mysql/ibdata1 4 @fake\n");
    CHECK(*honey.file_content("/honey/mysql/ibdata1") == "fake");
    CHECK(honey.is_directory("/honey"));

    auto filled = vfs_from_manifest("# comment\n\nF /f 3 41\n");
    CHECK(*filled.file_content("/f") == "AAA");
}

TEST_CASE("malformed manifest lines report their line number") {
    try {
        vfs_from_manifest("X /oops\n");
        FAIL("expected ManifestError");
    } catch (const ManifestError& e) {
        CHECK(e.line() == 1);
        CHECK(std::string(e.what()).starts_with("MalformedManifestLine(1)"));
    }
    CHECK_THROWS_AS(vfs_from_manifest("D /ok\nF /f notanumber 00\n"), ManifestError);
    CHECK_THROWS_AS(vfs_from_manifest("F /f 4 @abc\n"), ManifestError);
    CHECK_THROWS_AS(vfs_from_manifest("D relative\n"), ManifestError);
}

TEST_CASE("random mutations keep the parent-exists invariant") {
    test::Rng rng(11);
    const std::vector<std::string> paths = {"/a", "/a/b", "/a/b/c", "/d", "/d/e", "/a/f"};
    VirtualFS fs;
    for (int i = 0; i < 5000; ++i) {
        const auto& p = test::pick(rng, paths);
        switch (test::uniform(rng, 0, 3)) {
        case 0: fs.make_directory(p); break;
        case 1: fs.create_file(p, "x"); break;
        case 2: fs.remove_file(p); break;
        default: fs.remove_directory(p); break;
        }
        REQUIRE(fs.check_invariants());
    }
}
