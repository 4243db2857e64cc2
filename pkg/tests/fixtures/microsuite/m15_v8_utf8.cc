// entry: Upper
// category: different APIs (raw V8)
#include <node.h>
#include <v8.h>

using namespace v8;

void Upper(const FunctionCallbackInfo<Value>& args) {
  Isolate* isolate = args.GetIsolate();
  String::Utf8Value str(isolate, args[0]->ToString(isolate->GetCurrentContext()).ToLocalChecked());  // sink: tainted
  std::string s(*str);
  for (auto& c : s) c = toupper(c);
  args.GetReturnValue().Set(String::NewFromUtf8(isolate, s.c_str()).ToLocalChecked());  // sink: tainted
}
