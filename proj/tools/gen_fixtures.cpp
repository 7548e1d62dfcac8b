// Writes the checked-in test fixtures: the replay cassette for the Elara
// story, the teaser/satisfaction story documents, the synthetic tileset and
// the alias map. Run from the repository root:
//
//   ./build/tools/gen_fixtures tests/fixtures
//
// Regenerate whenever prompt templates or fixture content change, so the
// cassette fingerprints keep matching what the gateway computes.

#include <filesystem>
#include <iostream>
#include <string>

#include "json.hpp"
#include "scenegen/gateway.hpp"
#include "scenegen/util.hpp"

using nlohmann::json;
using scenegen::prompt_template;

namespace {

const char* kElaraStory =
    "In the heart of the Enchanted Forest, young Elara discovered an ancient map hidden "
    "within a hollow oak. It led her to the legendary Crystal Cavern, rumored to grant the "
    "finder a single wish. Braving treacherous paths and wild creatures, Elara reached the "
    "cavern's shimmering entrance. Inside, she faced the Guardian, a majestic dragon. With "
    "courage and wit, she solved the Guardian's riddle, earning her the wish. Elara wished "
    "for peace in her war-torn village. As she exited the cavern, the skies cleared, and "
    "harmony was restored, proving that bravery and hope could transform the world.";

std::string fill(std::string text, const std::string& key, const std::string& value) {
    const std::string needle = "{" + key + "}";
    size_t pos = text.find(needle);
    if (pos != std::string::npos) text.replace(pos, needle.size(), value);
    return text;
}

json triple(const char* s, const char* r, const char* o) {
    return {{"subject", s}, {"relation", r}, {"object", o}};
}

json object(const char* name) { return {{"name", name}}; }

json object(const char* name, const char* affordance, const char* terrain = nullptr) {
    json j = {{"name", name}, {"affordance", affordance}};
    if (terrain) j["suggested_terrain"] = terrain;
    return j;
}

json elara_story_document() {
    json doc;
    doc["title"] = "Elara and the Crystal Cavern";
    doc["story"] = kElaraStory;
    doc["frames"] = json::array();

    json f1;
    f1["name"] = "Elara discovers the ancient map";
    f1["scene_break"] = false;
    f1["triples"] = json::array({
        triple("Hollow oak", "contains", "ancient map"),
        triple("Elara", "stands near", "hollow oak"),
        triple("Sunlight", "filters through", "forest canopy"),
    });
    f1["objects"] = json::array({object("hollow oak"), object("ancient map"), object("Elara"),
                                 object("sunlight"), object("forest canopy")});
    doc["frames"].push_back(f1);

    json f2;
    f2["name"] = "Elara faces the treacherous paths";
    f2["scene_break"] = false;
    f2["triples"] = json::array({
        triple("Elara", "walks along", "rocky path"),
        triple("Wild creatures", "hide behind", "dense bushes"),
        triple("Treacherous paths", "lead to", "Crystal Cavern"),
    });
    f2["objects"] = json::array({object("Elara"), object("rocky path"), object("wild creatures"),
                                 object("dense bushes"), object("treacherous paths"),
                                 object("Crystal Cavern")});
    doc["frames"].push_back(f2);

    json f3;
    f3["name"] = "Elara meets the Guardian dragon";
    f3["scene_break"] = true;
    f3["triples"] = json::array({
        triple("Crystal Cavern entrance", "glows with", "shimmering light"),
        triple("Guardian dragon", "sits atop", "crystal throne"),
        triple("Elara", "stands before", "Guardian dragon"),
    });
    f3["objects"] = json::array({object("Crystal Cavern entrance"), object("shimmering light"),
                                 object("Guardian dragon"), object("crystal throne"),
                                 object("Elara")});
    doc["frames"].push_back(f3);
    return doc;
}

json cassette_record(const std::string& template_id, const std::string& prompt,
                     const std::string& response) {
    return {{"template_id", template_id}, {"prompt", prompt}, {"response", response}};
}

json elara_cassette() {
    json records = json::array();

    std::string p1 = prompt_template("prompt_1").template_text + "\nTheme: enchanted forest";
    records.push_back(cassette_record("prompt_1", p1, kElaraStory));

    std::string p2 = fill(prompt_template("prompt_2").template_text, "story", kElaraStory);
    records.push_back(cassette_record("prompt_2", p2, elara_story_document().dump()));

    struct Cls {
        const char* name;
        const char* affordance;
        const char* terrain;
    };
    const Cls classifications[] = {
        {"hollow oak", "environmental_object", "forest"},
        {"ancient map", "item_collectible", ""},
        {"elara", "character_creature", ""},
        {"sunlight", "environmental_object", ""},
        {"forest canopy", "terrain", "forest"},
        {"rocky path", "environmental_object", "rocky"},
        {"wild creatures", "character_creature", ""},
        {"dense bushes", "environmental_object", "forest"},
        {"treacherous paths", "environmental_object", "treacherous"},
        {"crystal cavern", "environmental_object", "cavern"},
        {"crystal cavern entrance", "interactive_object", "cavern"},
        {"shimmering light", "environmental_object", ""},
        {"guardian dragon", "character_creature", ""},
        {"crystal throne", "interactive_object", ""},
    };
    const std::string classify_template = prompt_template("classify_object").template_text;
    for (const Cls& c : classifications) {
        std::string prompt = fill(fill(classify_template, "name", c.name), "context", kElaraStory);
        json response = {{"affordance", c.affordance}, {"suggested_terrain", c.terrain}};
        records.push_back(cassette_record("classify_object", prompt, response.dump()));
    }
    return json{{"records", records}};
}

json teaser_story() {
    json doc;
    doc["title"] = "teaser layout";
    doc["story"] =
        "A house stands in a clearing beside a tree, with a barrel, a flower and a tree "
        "stump nearby.";
    json frame;
    frame["name"] = "clearing";
    frame["scene_break"] = false;
    // Anchors settle before their dependents: the tree moves first, then
    // everything placed relative to it.
    frame["triples"] = json::array({
        triple("Tree", "to the right of", "Barrel"),
        triple("House", "below", "Tree"),
        triple("Flower", "above", "Tree"),
        triple("Tree stump", "to the left of", "Tree"),
    });
    frame["objects"] = json::array({
        object("tree", "environmental_object"),
        object("house", "environmental_object"),
        object("barrel", "interactive_object"),
        object("flower", "item_collectible"),
        object("tree stump", "environmental_object"),
    });
    doc["frames"] = json::array({frame});
    return doc;
}

json sat78_story() {
    json doc;
    doc["title"] = "satisfaction arithmetic";
    doc["story"] = "Three vignettes pinning the story-level satisfaction arithmetic.";
    doc["frames"] = json::array();

    json f1;
    f1["name"] = "shore camp";
    f1["scene_break"] = false;
    f1["triples"] = json::array({
        triple("tree", "at right of", "barrel"),
        triple("house", "below", "tree"),
        triple("flower", "above", "tree"),
    });
    f1["objects"] = json::array({
        object("tree", "environmental_object"),
        object("barrel", "interactive_object"),
        object("house", "environmental_object"),
        object("flower", "item_collectible"),
    });
    doc["frames"].push_back(f1);

    json f2;
    f2["name"] = "lantern night";
    f2["scene_break"] = true;
    f2["triples"] = json::array({
        triple("hero", "walks along", "stone path"),
        triple("lantern", "on", "table"),
        triple("hero", "stands near", "table"),
    });
    f2["objects"] = json::array({
        object("hero", "character_creature"),
        object("stone path", "terrain", "stone"),
        object("lantern", "item_collectible"),
        object("table", "interactive_object"),
    });
    doc["frames"].push_back(f2);

    json f3;
    f3["name"] = "guardian test";
    f3["scene_break"] = true;
    f3["triples"] = json::array({
        triple("dragon", "on", "knight"),
        triple("gem", "on top of", "altar"),
        triple("statue", "at left of", "altar"),
    });
    f3["objects"] = json::array({
        object("dragon", "character_creature"),
        object("knight", "character_creature"),
        object("gem", "item_collectible"),
        object("altar", "interactive_object"),
        object("statue", "environmental_object"),
    });
    doc["frames"].push_back(f3);
    return doc;
}

std::string tileset_jsonl() {
    struct Tile {
        const char* id;
        const char* name;
        const char* group;
        const char* supercategory;
        const char* affordance;
    };
    const Tile tiles[] = {
        {"t001", "grass ground", "ground cover", "terrain base", "terrain"},
        {"t002", "forest floor moss", "ground cover", "terrain base", "terrain"},
        {"t003", "rocky ground", "ground cover", "terrain base", "terrain"},
        {"t004", "dirt trail", "paths", "terrain base", "terrain"},
        {"t005", "sand dunes", "ground cover", "terrain base", "terrain"},
        {"t006", "shallow water", "liquids", "terrain base", "terrain"},
        {"t007", "snow field", "ground cover", "terrain base", "terrain"},
        {"t008", "stone floor", "ground cover", "terrain base", "terrain"},
        {"t009", "cavern ground", "ground cover", "terrain base", "terrain"},
        {"t010", "oak tree", "trees", "plants", "environmental_object"},
        {"t011", "pine tree", "trees", "plants", "environmental_object"},
        {"t012", "dense bush", "bushes", "plants", "environmental_object"},
        {"t013", "tree stump", "trees", "plants", "environmental_object"},
        {"t014", "wild flower patch", "flowers", "plants", "environmental_object"},
        {"t015", "small house", "buildings", "structures", "environmental_object"},
        {"t016", "stone statue", "statues", "props", "environmental_object"},
        {"t017", "crystal cluster", "crystals", "props", "environmental_object"},
        {"t018", "light beam", "effects", "props", "environmental_object"},
        {"t019", "canopy foliage", "trees", "plants", "environmental_object"},
        {"t020", "boulder rock", "rocks", "props", "environmental_object"},
        {"t021", "wooden barrel", "containers", "props", "interactive_object"},
        {"t022", "treasure chest", "containers", "props", "interactive_object"},
        {"t023", "cave entrance door", "doors", "structures", "interactive_object"},
        {"t024", "stone throne", "furniture", "props", "interactive_object"},
        {"t025", "wooden table", "furniture", "props", "interactive_object"},
        {"t026", "altar slab", "furniture", "props", "interactive_object"},
        {"t027", "old map scroll", "scrolls", "items", "item_collectible"},
        {"t028", "glowing gem", "gems", "items", "item_collectible"},
        {"t029", "golden amulet", "jewelry", "items", "item_collectible"},
        {"t030", "blossom pickup", "flowers", "items", "item_collectible"},
        {"t031", "brass lantern", "lights", "items", "item_collectible"},
        {"t032", "green dragon", "dragons", "creatures", "character_creature"},
        {"t033", "forest wolf", "beasts", "creatures", "character_creature"},
        {"t034", "village girl", "humans", "characters", "character_creature"},
        {"t035", "armored knight", "humans", "characters", "character_creature"},
        {"t036", "cave guardian", "monsters", "creatures", "character_creature"},
    };
    std::string out;
    for (const Tile& t : tiles) {
        json rec = {{"id", t.id},
                    {"name", t.name},
                    {"group", t.group},
                    {"supercategory", t.supercategory},
                    {"affordance", t.affordance}};
        out += rec.dump() + "\n";
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    std::filesystem::path dir = argc > 1 ? argv[1] : "tests/fixtures";
    std::filesystem::create_directories(dir);

    scenegen::write_text_file(dir / "elara_cassette.json", elara_cassette().dump(2) + "\n");
    scenegen::write_text_file(dir / "elara.story.json", elara_story_document().dump(2) + "\n");
    scenegen::write_text_file(dir / "teaser.story.json", teaser_story().dump(2) + "\n");
    scenegen::write_text_file(dir / "sat78.story.json", sat78_story().dump(2) + "\n");
    scenegen::write_text_file(dir / "tiles_fixture.jsonl", tileset_jsonl());
    scenegen::write_text_file(dir / "aliases.json",
                              json{{"guardian", "guardian dragon"}}.dump(2) + "\n");
    std::cout << "fixtures written to " << dir.string() << "\n";
    return 0;
}
