#include "danes/textprep.hpp"

#include <algorithm>

namespace danes::textprep {

// Versioned English contraction list. Keys are matched case-insensitively on
// word boundaries; the table is sorted longest-key-first at startup so that
// "can't've" wins over "can't".
const std::vector<std::pair<std::string, std::string>>& contraction_table() {
    static const std::vector<std::pair<std::string, std::string>> table = [] {
        std::vector<std::pair<std::string, std::string>> t = {
            {"ain't", "am not"},
            {"aren't", "are not"},
            {"can't've", "cannot have"},
            {"can't", "cannot"},
            {"could've", "could have"},
            {"couldn't've", "could not have"},
            {"couldn't", "could not"},
            {"didn't", "did not"},
            {"doesn't", "does not"},
            {"don't", "do not"},
            {"hadn't've", "had not have"},
            {"hadn't", "had not"},
            {"hasn't", "has not"},
            {"haven't", "have not"},
            {"he'd've", "he would have"},
            {"he'd", "he would"},
            {"he'll've", "he will have"},
            {"he'll", "he will"},
            {"he's", "he is"},
            {"how'd'y", "how do you"},
            {"how'd", "how did"},
            {"how'll", "how will"},
            {"how's", "how is"},
            {"I'd've", "I would have"},
            {"I'd", "I would"},
            {"I'll've", "I will have"},
            {"I'll", "I will"},
            {"I'm", "I am"},
            {"I've", "I have"},
            {"isn't", "is not"},
            {"it'd've", "it would have"},
            {"it'd", "it would"},
            {"it'll've", "it will have"},
            {"it'll", "it will"},
            {"it's", "it is"},
            {"let's", "let us"},
            {"ma'am", "madam"},
            {"mayn't", "may not"},
            {"might've", "might have"},
            {"mightn't've", "might not have"},
            {"mightn't", "might not"},
            {"must've", "must have"},
            {"mustn't've", "must not have"},
            {"mustn't", "must not"},
            {"needn't've", "need not have"},
            {"needn't", "need not"},
            {"o'clock", "of the clock"},
            {"oughtn't've", "ought not have"},
            {"oughtn't", "ought not"},
            {"shan't've", "shall not have"},
            {"shan't", "shall not"},
            {"sha'n't", "shall not"},
            {"she'd've", "she would have"},
            {"she'd", "she would"},
            {"she'll've", "she will have"},
            {"she'll", "she will"},
            {"she's", "she is"},
            {"should've", "should have"},
            {"shouldn't've", "should not have"},
            {"shouldn't", "should not"},
            {"so've", "so have"},
            {"so's", "so is"},
            {"that'd've", "that would have"},
            {"that'd", "that would"},
            {"that's", "that is"},
            {"there'd've", "there would have"},
            {"there'd", "there would"},
            {"there's", "there is"},
            {"they'd've", "they would have"},
            {"they'd", "they would"},
            {"they'll've", "they will have"},
            {"they'll", "they will"},
            {"they're", "they are"},
            {"they've", "they have"},
            {"to've", "to have"},
            {"wasn't", "was not"},
            {"we'd've", "we would have"},
            {"we'd", "we would"},
            {"we'll've", "we will have"},
            {"we'll", "we will"},
            {"we're", "we are"},
            {"we've", "we have"},
            {"weren't", "were not"},
            {"what'll've", "what will have"},
            {"what'll", "what will"},
            {"what're", "what are"},
            {"what's", "what is"},
            {"what've", "what have"},
            {"when's", "when is"},
            {"when've", "when have"},
            {"where'd", "where did"},
            {"where's", "where is"},
            {"where've", "where have"},
            {"who'll've", "who will have"},
            {"who'll", "who will"},
            {"who's", "who is"},
            {"who've", "who have"},
            {"why's", "why is"},
            {"why've", "why have"},
            {"will've", "will have"},
            {"won't've", "will not have"},
            {"won't", "will not"},
            {"would've", "would have"},
            {"wouldn't've", "would not have"},
            {"wouldn't", "would not"},
            {"y'all'd've", "you all would have"},
            {"y'all'd", "you all would"},
            {"y'all're", "you all are"},
            {"y'all've", "you all have"},
            {"y'all", "you all"},
            {"you'd've", "you would have"},
            {"you'd", "you would"},
            {"you'll've", "you will have"},
            {"you'll", "you will"},
            {"you're", "you are"},
            {"you've", "you have"},
        };
        std::stable_sort(t.begin(), t.end(), [](const auto& a, const auto& b) {
            return a.first.size() > b.first.size();
        });
        return t;
    }();
    return table;
}

} // namespace danes::textprep
