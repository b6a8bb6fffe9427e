#pragma once

#include <string_view>

// Contents of the files under data/, embedded at build time.
namespace mortem::resources {

std::string_view stopwords();
std::string_view demo_lexicon();
std::string_view sentiment_lexicon();
std::string_view negations();

}  // namespace mortem::resources
