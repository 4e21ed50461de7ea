package demo.io;

import java.io.BufferedReader;
import java.io.IOException;
import java.io.StringReader;

public final class Parser {
    static final String SAMPLE = """
        alpha beta
        gamma "quoted" delta
        """;

    public static int countWords(String... lines) {
        int words = 0;
        outer:
        for (String line : lines) {
            for (int i = 0, n = line.length(); i < n; i++) {
                char c = line.charAt(i);
                if (c == '#') {
                    continue outer;
                }
                if (c == ' ' || c == '\'') {
                    words++;
                }
            }
        }
        return words;
    }

    public static String firstLine(String text) {
        try (BufferedReader reader = new BufferedReader(new StringReader(text))) {
            return reader.readLine();
        } catch (IOException e) {
            throw new IllegalStateException(e);
        }
    }
}
