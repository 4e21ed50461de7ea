import java.util.List;

public class Csv {
    private String buf = "";

    String join(List<String> cells) {
        StringBuilder buf = new StringBuilder();
        for (String cell : cells) {
            if (buf.length() > 0) {
                buf.append(',');
            }
            buf.append(cell);
        }
        return buf.toString();
    }

    String header() {
        return buf;
    }
}
