import java.util.List;

public class Csv {
    private String buf = "";

    String join(List<String> cells) {
        StringBuilder builder = new StringBuilder();
        for (String cell : cells) {
            if (builder.length() > 0) {
                builder.append(',');
            }
            builder.append(cell);
        }
        return builder.toString();
    }

    String header() {
        return buf;
    }
}
